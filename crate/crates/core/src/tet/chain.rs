//! Vertex links and the cosine-law route from lengths to angles.
//!
//! Each vertex of a decorated tetrahedron is cut off by a small triangle:
//! a hyperbolic triangle (the truncation face) at a hyperideal vertex, a
//! Euclidean triangle on the horosphere at an ideal one. The side lengths
//! of these triangles follow from the edge lengths, and the dihedral angles
//! are the corner angles of the triangles.

use super::{edge_index, EdgeLengths6, TetShape, EDGES, EDGE_LABELS};
use crate::error::{Error, Result};

/// Beyond this length products of four Gram entries overflow f64.
const MAX_PLAIN_LENGTH: f64 = 170.0;

/// Side lengths of the four vertex triangles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexLink {
    /// `sides[v][m]` is the side of the triangle at `v` between the points
    /// where the edges to the `m`-th pair of other vertices cross it. Pairs
    /// are ordered lexicographically: for `v = 0` they are (1,2), (1,3), (2,3).
    pub sides: [[f64; 3]; 4],
    /// True where the triangle is hyperbolic (hyperideal vertex).
    pub hyperbolic: [bool; 4],
}

pub(crate) fn others(v: usize) -> [usize; 3] {
    let mut o = [0; 3];
    let mut n = 0;
    for w in 0..4 {
        if w != v {
            o[n] = w;
            n += 1;
        }
    }
    o
}

fn pair_slot(v: usize, p: usize, q: usize) -> usize {
    let o = others(v);
    let (p, q) = if p < q { (p, q) } else { (q, p) };
    match (o.iter().position(|&x| x == p), o.iter().position(|&x| x == q)) {
        (Some(0), Some(1)) => 0,
        (Some(0), Some(2)) => 1,
        (Some(1), Some(2)) => 2,
        _ => panic!("vertices {p},{q} are not a pair opposite to {v}"),
    }
}

impl VertexLink {
    /// Side of the triangle at `v` between the edges to `p` and `q`.
    pub fn theta(&self, v: usize, p: usize, q: usize) -> f64 {
        self.sides[v][pair_slot(v, p, q)]
    }
}

/// Plain f64 Gram data: `g[i][j] = -G_ij` and the diagonal `G_ii`.
struct Gram {
    g: [[f64; 4]; 4],
    diag: [f64; 4],
    /// `g_ij^2 - G_ii G_jj`, computed without cancellation.
    gap: [[f64; 4]; 4],
}

fn gram(shape: TetShape, l: &EdgeLengths6) -> Result<Gram> {
    let mut g = [[0.0; 4]; 4];
    let mut gap = [[0.0; 4]; 4];
    let mut diag = [0.0; 4];
    for (v, d) in diag.iter_mut().enumerate() {
        *d = if shape.is_hyperideal(v) { 1.0 } else { 0.0 };
    }
    for (e, &(i, j)) in EDGES.iter().enumerate() {
        let x = l.0[e];
        if x.abs() > MAX_PLAIN_LENGTH {
            return Err(Error::Overflow { shape, edge: EDGE_LABELS[e] });
        }
        let (val, gp) = match (shape.is_hyperideal(i), shape.is_hyperideal(j)) {
            (true, true) => (x.cosh(), x.sinh().powi(2)),
            (false, false) => (2.0 * x.exp(), 4.0 * (2.0 * x).exp()),
            _ => (x.exp(), (2.0 * x).exp()),
        };
        g[i][j] = val;
        g[j][i] = val;
        gap[i][j] = gp;
        gap[j][i] = gp;
    }
    Ok(Gram { g, diag, gap })
}

/// Side lengths of all four vertex triangles.
pub fn theta_chain(shape: TetShape, l: &EdgeLengths6) -> Result<VertexLink> {
    shape.check_box(l, true)?;
    let gr = gram(shape, l)?;
    let (g, d) = (&gr.g, &gr.diag);
    let mut sides = [[0.0; 3]; 4];
    let mut hyperbolic = [false; 4];
    for v in 0..4 {
        let o = others(v);
        hyperbolic[v] = shape.is_hyperideal(v);
        for (m, (p, q)) in [(o[0], o[1]), (o[0], o[2]), (o[1], o[2])].into_iter().enumerate() {
            sides[v][m] = if hyperbolic[v] {
                // sinh^2 θ = (N^2 - D^2) / D^2 with cosh θ = N / D expanded
                let num = 2.0 * g[v][p] * g[v][q] * g[p][q]
                    + gr.gap[p][q]
                    + d[q] * g[v][p].powi(2)
                    + d[p] * g[v][q].powi(2);
                let den = gr.gap[v][p] * gr.gap[v][q];
                (num / den).sqrt().asinh()
            } else {
                let (xp, xq) = (1.0 / g[v][p], 1.0 / g[v][q]);
                (d[p] * xp * xp + d[q] * xq * xq + 2.0 * g[p][q] * xp * xq).sqrt()
            };
        }
    }
    for (v, row) in sides.iter().enumerate() {
        if let Some(m) = row.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            let o = others(v);
            let (p, q) = [(o[0], o[1]), (o[0], o[2]), (o[1], o[2])][m];
            let e = edge_index(p, q);
            return Err(Error::Overflow { shape, edge: EDGE_LABELS[e] });
        }
    }
    Ok(VertexLink { sides, hyperbolic })
}

/// Cosines of the dihedral angles read off the vertex triangles by the
/// hyperbolic or Euclidean law of cosines.
///
/// The angle at edge `vw` is the corner at `w` of the triangle at `v`; the
/// link of a hyperideal endpoint is used when there is one.
pub fn chain_cosines(shape: TetShape, l: &EdgeLengths6) -> Result<[f64; 6]> {
    let link = theta_chain(shape, l)?;
    let mut out = [0.0; 6];
    for (e, &(i, j)) in EDGES.iter().enumerate() {
        let (v, w) = if shape.is_hyperideal(j) && !shape.is_hyperideal(i) { (j, i) } else { (i, j) };
        let o: Vec<usize> = (0..4).filter(|&x| x != v && x != w).collect();
        let a = link.theta(v, w, o[0]);
        let b = link.theta(v, w, o[1]);
        let c = link.theta(v, o[0], o[1]);
        out[e] = if link.hyperbolic[v] {
            (a.cosh() * b.cosh() - c.cosh()) / (a.sinh() * b.sinh())
        } else {
            (a * a + b * b - c * c) / (2.0 * a * b)
        };
    }
    Ok(out)
}
