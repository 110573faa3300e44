//! Geometry of a single decorated tetrahedron.
//!
//! A tetrahedron of shape `k-(4-k)` has hyperideal (truncated) vertices
//! `0..k` and ideal (horosphere-decorated) vertices `k..4`, counted from 0
//! here. Edges are always listed as `01, 02, 03, 12, 13, 23`, which is the
//! order `l12, l13, l14, l23, l24, l34` in 1-based notation.
//!
//! The decorated length of an edge enters the vertex Gram matrix as
//!
//! | endpoints          | `-G_ij`     |
//! |--------------------|-------------|
//! | hyperideal/hyper   | `cosh l`    |
//! | hyperideal/ideal   | `e^l`       |
//! | ideal/ideal        | `2 e^l`     |
//!
//! with `G_ii = 1` at hyperideal and `0` at ideal vertices. Everything in
//! this module is a function of that matrix.

mod chain;
mod covolume;
mod phi;
mod volume;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use chain::{chain_cosines, theta_chain, VertexLink};
pub use covolume::{covolume, covolume_hessian, decoration_directions, CovolumeHessian};
pub use phi::{
    classify_degeneration, dihedral_angles_extended, dihedral_angles_strict, is_realizable, phi,
};
pub use volume::{lengths_from_angles, schlafli_volume, tet_volume};

/// Local edges as vertex pairs, in canonical order.
pub const EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// 1-based edge labels, for messages.
pub const EDGE_LABELS: [&str; 6] = ["12", "13", "14", "23", "24", "34"];

/// Index of the edge joining local vertices `i != j`.
pub fn edge_index(i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => panic!("no edge between vertices {i} and {j}"),
    }
}

/// The edge sharing no vertex with `e`.
pub fn opposite_edge(e: usize) -> usize {
    5 - e
}

/// Number of hyperideal vertices of a tetrahedron.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TetShape(u8);

impl TetShape {
    pub const IDEAL: TetShape = TetShape(0);
    pub const ONE_THREE: TetShape = TetShape(1);
    pub const TWO_TWO: TetShape = TetShape(2);
    pub const THREE_ONE: TetShape = TetShape(3);
    pub const HYPERIDEAL: TetShape = TetShape(4);
    pub const ALL: [TetShape; 5] =
        [Self::IDEAL, Self::ONE_THREE, Self::TWO_TWO, Self::THREE_ONE, Self::HYPERIDEAL];

    pub fn new(hyperideal_count: usize) -> Result<Self> {
        if hyperideal_count > 4 {
            return Err(Error::Domain(format!("a tetrahedron has 4 vertices, not {hyperideal_count}")));
        }
        Ok(TetShape(hyperideal_count as u8))
    }

    pub fn hyperideal_count(self) -> usize {
        self.0 as usize
    }

    pub fn is_hyperideal(self, v: usize) -> bool {
        v < self.hyperideal_count()
    }

    /// Edges joining two hyperideal vertices; these must have positive length.
    pub fn is_truncated_edge(self, e: usize) -> bool {
        let (i, j) = EDGES[e];
        self.is_hyperideal(i) && self.is_hyperideal(j)
    }

    pub fn ideal_vertices(self) -> std::ops::Range<usize> {
        self.hyperideal_count()..4
    }

    /// True if every truncated edge is positive (`strict`) or non-negative.
    pub fn in_box(self, l: &EdgeLengths6, strict: bool) -> bool {
        l.0.iter().all(|x| x.is_finite())
            && (0..6).all(|e| {
                !self.is_truncated_edge(e) || if strict { l.0[e] > 0.0 } else { l.0[e] >= 0.0 }
            })
    }

    pub(crate) fn check_box(self, l: &EdgeLengths6, strict: bool) -> Result<()> {
        if let Some(e) = l.0.iter().position(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("edge {} has non-finite length", EDGE_LABELS[e])));
        }
        for e in 0..6 {
            if self.is_truncated_edge(e) && (l.0[e] < 0.0 || (strict && l.0[e] == 0.0)) {
                return Err(Error::Domain(format!(
                    "edge {} of a {self} tetrahedron joins two hyperideal vertices and has length {}",
                    EDGE_LABELS[e], l.0[e]
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for TetShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, 4 - self.0)
    }
}

impl FromStr for TetShape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("bad tetrahedron shape {s:?}, expected e.g. 2-2"));
        let (a, b) = s.trim().split_once('-').ok_or_else(bad)?;
        let a: usize = a.parse().map_err(|_| bad())?;
        let b: usize = b.parse().map_err(|_| bad())?;
        if a + b != 4 {
            return Err(bad());
        }
        TetShape::new(a)
    }
}

impl TryFrom<String> for TetShape {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TetShape> for String {
    fn from(s: TetShape) -> String {
        s.to_string()
    }
}

/// Decorated edge lengths in canonical edge order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeLengths6(pub [f64; 6]);

/// Dihedral angles in canonical edge order, radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Angles6(pub [f64; 6]);

impl Angles6 {
    /// Sum of the three angles at local vertex `v`.
    pub fn vertex_sum(&self, v: usize) -> f64 {
        (0..4).filter(|&w| w != v).map(|w| self.0[edge_index(v, w)]).sum()
    }
}

/// Where a length vector sits relative to the realizable set.
///
/// `Omega1..3` are the regions where the angle pair `{12,34}`, `{13,24}`,
/// `{14,23}` has degenerated to π; `BoundaryX*` are their frontiers.
/// `ZeroTruncatedEdge` covers the remaining points of the closed box where a
/// hyperideal/hyperideal edge has length exactly 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DegenerationClass {
    InteriorL,
    Omega1,
    Omega2,
    Omega3,
    BoundaryX1,
    BoundaryX2,
    BoundaryX3,
    ZeroTruncatedEdge,
}

/// Replace negative truncated-edge lengths by 0; other entries untouched.
pub fn clamp_truncated_edges(shape: TetShape, l: &EdgeLengths6) -> EdgeLengths6 {
    let mut out = *l;
    for e in 0..6 {
        if shape.is_truncated_edge(e) {
            out.0[e] = out.0[e].max(0.0);
        }
    }
    out
}

/// Per-vertex sets of incident edges, as indicator vectors.
pub(crate) fn vertex_direction(v: usize) -> [f64; 6] {
    let mut d = [0.0; 6];
    for (e, &(i, j)) in EDGES.iter().enumerate() {
        if i == v || j == v {
            d[e] = 1.0;
        }
    }
    d
}
