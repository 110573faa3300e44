//! Triangulated pseudo 3-manifolds: gluing data, edge and vertex classes,
//! curvature, and decorations.
//!
//! Tetrahedra have local vertices `0..4`; face `f` is the face opposite
//! vertex `f`. A face gluing carries a permutation `perm` of `0..4` with
//! `perm[f]` equal to the target face; it maps the vertices of face `f` to
//! those of the target face.
//!
//! Vertex classes are numbered in order of first appearance when scanning
//! tetrahedra in order and their vertices `0..4`; edge classes likewise,
//! over the local edges `01, 02, 03, 12, 13, 23`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationError};
use crate::tet::{
    classify_degeneration, dihedral_angles_extended, dihedral_angles_strict, edge_index,
    is_realizable, Angles6, EdgeLengths6, TetShape, EDGES,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceGluing {
    pub tet: usize,
    pub face: usize,
    pub perm: [usize; 4],
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    #[default]
    Ideal,
    Hyperideal,
}

/// Raw gluing data, as read from a triangulation file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GluingSpec {
    pub tets: usize,
    /// Four entries per tetrahedron; `None` marks an unglued face.
    pub gluings: Vec<Vec<Option<FaceGluing>>>,
    /// Vertex class -> kind; classes not listed are ideal.
    #[serde(default)]
    pub vertex_flags: BTreeMap<usize, VertexKind>,
}

impl GluingSpec {
    pub fn from_json(text: &str) -> std::result::Result<Self, ValidationError> {
        serde_json::from_str(text).map_err(|e| ValidationError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("gluing data serializes")
    }
}

/// Edge lengths indexed by edge class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyhedralMetric(pub Vec<f64>);

/// Curvature indexed by edge class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureVector(pub Vec<f64>);

impl CurvatureVector {
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }
}

/// Horosphere shifts indexed by vertex class; zero at hyperideal classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecorationVector(pub Vec<f64>);

/// One edge class: its incidences in cyclic order around the edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeClass {
    /// `(tet, local edge index)` pairs.
    pub incidences: Vec<(usize, usize)>,
    /// Vertex classes at the two ends.
    pub endpoints: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValenceReport {
    pub valences: Vec<usize>,
    pub min: Option<usize>,
    pub all_at_least_ten: bool,
}

#[derive(Clone, Debug)]
struct TetData {
    shape: TetShape,
    /// `slots[i]` is the local vertex sitting in canonical position `i`.
    slots: [usize; 4],
    /// Edge class of each canonical edge.
    canon_edges: [usize; 6],
}

#[derive(Clone, Debug)]
pub struct TriangulatedComplex {
    gluing: GluingSpec,
    edge_of: Vec<[usize; 6]>,
    vertex_of: Vec<[usize; 4]>,
    edges: Vec<EdgeClass>,
    kinds: Vec<VertexKind>,
    tets: Vec<TetData>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Class labels numbered by first appearance.
    fn labels(&mut self) -> (Vec<usize>, usize) {
        let mut seen = BTreeMap::new();
        let mut out = Vec::with_capacity(self.0.len());
        for i in 0..self.0.len() {
            let r = self.find(i);
            let next = seen.len();
            out.push(*seen.entry(r).or_insert(next));
        }
        (out, seen.len())
    }
}

fn check_gluings(g: &GluingSpec) -> std::result::Result<Vec<[FaceGluing; 4]>, ValidationError> {
    if g.gluings.len() != g.tets {
        return Err(ValidationError::TetCount { declared: g.tets, listed: g.gluings.len() });
    }
    let mut out = Vec::with_capacity(g.tets);
    for (tet, faces) in g.gluings.iter().enumerate() {
        if faces.len() != 4 {
            return Err(ValidationError::FaceCount { tet, got: faces.len() });
        }
        let mut row = [FaceGluing { tet: 0, face: 0, perm: [0, 1, 2, 3] }; 4];
        for (face, entry) in faces.iter().enumerate() {
            let gl = entry.ok_or(ValidationError::UngluedFace { tet, face })?;
            if gl.tet >= g.tets {
                return Err(ValidationError::TargetTet { tet, face, target: gl.tet });
            }
            let mut hit = [false; 4];
            for &p in &gl.perm {
                if p > 3 || hit[p] {
                    return Err(ValidationError::BadPermutation { tet, face });
                }
                hit[p] = true;
            }
            if gl.perm[face] != gl.face {
                return Err(ValidationError::FaceMismatch { tet, face, sent: gl.perm[face], named: gl.face });
            }
            if gl.tet == tet && gl.face == face && gl.perm == [0, 1, 2, 3] {
                return Err(ValidationError::TrivialSelfGluing { tet, face });
            }
            row[face] = gl;
        }
        out.push(row);
    }
    for (tet, row) in out.iter().enumerate() {
        for (face, gl) in row.iter().enumerate() {
            let back = out[gl.tet][gl.face];
            let inverse = (0..4).all(|v| back.perm[gl.perm[v]] == v);
            if back.tet != tet || back.face != face || !inverse {
                return Err(ValidationError::NotInvolutive { tet, face });
            }
        }
    }
    Ok(out)
}

/// Walk once around the edge `ab` of `tet` and return the incidences met,
/// or `None` if the walk does not come back to where it started.
fn walk_edge(glue: &[[FaceGluing; 4]], tet: usize, a: usize, b: usize) -> Option<Vec<(usize, usize)>> {
    let rest: Vec<usize> = (0..4).filter(|&x| x != a && x != b).collect();
    let start = (tet, a, b, rest[0], rest[1]);
    let mut state = start;
    let mut seen = Vec::new();
    // each tet-edge can be met at most twice (once per orientation)
    for _ in 0..=12 * glue.len() {
        let (t, a, b, c, d) = state;
        seen.push((t, edge_index(a, b)));
        let gl = glue[t][c];
        let p = gl.perm;
        state = (gl.tet, p[a], p[b], p[d], p[c]);
        if state == start {
            return Some(seen);
        }
    }
    None
}

impl TriangulatedComplex {
    /// Validate gluing data and compute edge and vertex classes.
    pub fn build(g: GluingSpec) -> std::result::Result<Self, ValidationError> {
        let glue = check_gluings(&g)?;
        let n = g.tets;

        let mut ev = UnionFind::new(4 * n);
        let mut ee = UnionFind::new(6 * n);
        for (t, row) in glue.iter().enumerate() {
            for (f, gl) in row.iter().enumerate() {
                for v in (0..4).filter(|&v| v != f) {
                    ev.union(4 * t + v, 4 * gl.tet + gl.perm[v]);
                }
                for (e, &(a, b)) in EDGES.iter().enumerate() {
                    if a != f && b != f {
                        ee.union(6 * t + e, 6 * gl.tet + edge_index(gl.perm[a], gl.perm[b]));
                    }
                }
            }
        }
        let (vlabel, vcount) = ev.labels();
        let (elabel, ecount) = ee.labels();
        let vertex_of: Vec<[usize; 4]> =
            (0..n).map(|t| [0, 1, 2, 3].map(|v| vlabel[4 * t + v])).collect();
        let edge_of: Vec<[usize; 6]> =
            (0..n).map(|t| [0, 1, 2, 3, 4, 5].map(|e| elabel[6 * t + e])).collect();

        let mut members: Vec<Vec<(usize, usize)>> = vec![Vec::new(); ecount];
        for (t, row) in edge_of.iter().enumerate() {
            for (e, &c) in row.iter().enumerate() {
                members[c].push((t, e));
            }
        }
        let mut edges = Vec::with_capacity(ecount);
        for m in &members {
            let (t, e) = m[0];
            let (a, b) = EDGES[e];
            let cycle = walk_edge(&glue, t, a, b);
            let ok = match &cycle {
                Some(cyc) => {
                    let mut sorted = cyc.clone();
                    sorted.sort_unstable();
                    sorted.dedup();
                    sorted.len() == cyc.len() && cyc.len() == m.len()
                }
                None => false,
            };
            if !ok {
                return Err(ValidationError::NonCyclicEdge { tet: t, a, b });
            }
            edges.push(EdgeClass {
                incidences: cycle.expect("checked"),
                endpoints: (vertex_of[t][a], vertex_of[t][b]),
            });
        }

        if let Some((&class, _)) = g.vertex_flags.range(vcount..).next() {
            return Err(ValidationError::UnknownVertexClass { class, count: vcount });
        }
        let kinds: Vec<VertexKind> =
            (0..vcount).map(|v| g.vertex_flags.get(&v).copied().unwrap_or_default()).collect();

        let tets = (0..n)
            .map(|t| {
                let hyper = |v: usize| kinds[vertex_of[t][v]] == VertexKind::Hyperideal;
                let mut slots = [0, 1, 2, 3];
                slots.sort_by_key(|&v| !hyper(v));
                let k = (0..4).filter(|&v| hyper(v)).count();
                let canon_edges =
                    [0, 1, 2, 3, 4, 5].map(|e| edge_of[t][edge_index(slots[EDGES[e].0], slots[EDGES[e].1])]);
                TetData { shape: TetShape::new(k).expect("at most 4"), slots, canon_edges }
            })
            .collect();

        Ok(TriangulatedComplex { gluing: g, edge_of, vertex_of, edges, kinds, tets })
    }

    pub fn gluing(&self) -> &GluingSpec {
        &self.gluing
    }

    pub fn tet_count(&self) -> usize {
        self.tets.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn edge_classes(&self) -> &[EdgeClass] {
        &self.edges
    }

    pub fn vertex_kind(&self, v: usize) -> VertexKind {
        self.kinds[v]
    }

    pub fn vertex_kinds(&self) -> &[VertexKind] {
        &self.kinds
    }

    /// Vertex classes flagged ideal, ascending.
    pub fn ideal_vertices(&self) -> Vec<usize> {
        (0..self.kinds.len()).filter(|&v| self.kinds[v] == VertexKind::Ideal).collect()
    }

    /// Edge class of local edge `e` of tetrahedron `t`.
    pub fn edge_of(&self, t: usize, e: usize) -> usize {
        self.edge_of[t][e]
    }

    /// Vertex class of local vertex `v` of tetrahedron `t`.
    pub fn vertex_of(&self, t: usize, v: usize) -> usize {
        self.vertex_of[t][v]
    }

    pub fn tet_shape(&self, t: usize) -> TetShape {
        self.tets[t].shape
    }

    /// Local vertex in each canonical slot (hyperideal vertices first).
    pub fn canonical_slots(&self, t: usize) -> [usize; 4] {
        self.tets[t].slots
    }

    /// Edge class of each canonical edge of tetrahedron `t`.
    pub fn canonical_edges(&self, t: usize) -> [usize; 6] {
        self.tets[t].canon_edges
    }

    pub fn edge_valences(&self) -> ValenceReport {
        let valences: Vec<usize> = self.edges.iter().map(|e| e.incidences.len()).collect();
        let min = valences.iter().copied().min();
        let all_at_least_ten = valences.iter().all(|&v| v >= 10);
        ValenceReport { valences, min, all_at_least_ten }
    }

    fn check_metric(&self, m: &PolyhedralMetric) -> Result<()> {
        if m.0.len() != self.edges.len() {
            return Err(Error::MetricLength { expected: self.edges.len(), got: m.0.len() });
        }
        if m.0.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("metric has non-finite entries".into()));
        }
        Ok(())
    }

    /// Lengths of tetrahedron `t` in its canonical vertex order.
    pub fn tet_lengths(&self, t: usize, m: &PolyhedralMetric) -> EdgeLengths6 {
        EdgeLengths6(self.tets[t].canon_edges.map(|c| m.0[c]))
    }

    /// True iff every tetrahedron is realizable under `m`.
    pub fn is_decorated(&self, m: &PolyhedralMetric) -> bool {
        m.0.len() == self.edges.len()
            && (0..self.tets.len()).all(|t| is_realizable(self.tets[t].shape, &self.tet_lengths(t, m)))
    }

    /// Strict angles of tetrahedron `t` (canonical order).
    pub fn tet_angles(&self, t: usize, m: &PolyhedralMetric) -> Result<Angles6> {
        let shape = self.tets[t].shape;
        let l = self.tet_lengths(t, m);
        dihedral_angles_strict(shape, &l).map_err(|err| match err {
            Error::NotRealizable { class, .. } => Error::TetNotRealizable { tet: t, shape, class },
            Error::Domain(_) => match classify_degeneration(shape, &l) {
                Ok(class) => Error::TetNotRealizable { tet: t, shape, class },
                Err(_) => Error::Domain(format!("tetrahedron {t} ({shape}) has a truncated edge of negative length")),
            },
            other => other,
        })
    }

    /// Extended angles of tetrahedron `t` (canonical order).
    pub fn tet_angles_extended(&self, t: usize, m: &PolyhedralMetric) -> Angles6 {
        dihedral_angles_extended(self.tets[t].shape, &self.tet_lengths(t, m))
    }

    fn assemble(&self, angles: impl Fn(usize) -> Result<Angles6>) -> Result<CurvatureVector> {
        let mut sum = vec![0.0; self.edges.len()];
        for (t, data) in self.tets.iter().enumerate() {
            let a = angles(t)?;
            for (e, &c) in data.canon_edges.iter().enumerate() {
                sum[c] += a.0[e];
            }
        }
        Ok(CurvatureVector(sum.into_iter().map(|s| 2.0 * PI - s).collect()))
    }

    /// `K_e = 2π − Σ α` over the incidences of each edge class.
    pub fn curvature(&self, m: &PolyhedralMetric) -> Result<CurvatureVector> {
        self.check_metric(m)?;
        self.assemble(|t| self.tet_angles(t, m))
    }

    /// Curvature from the extended angles; defined for every finite metric.
    pub fn extended_curvature(&self, m: &PolyhedralMetric) -> Result<CurvatureVector> {
        self.check_metric(m)?;
        self.assemble(|t| Ok(self.tet_angles_extended(t, m)))
    }

    /// Edge × vertex matrix of edge-end counts (0, 1 or 2).
    pub fn incidence_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.edges.len(), self.kinds.len());
        for (e, class) in self.edges.iter().enumerate() {
            a[(e, class.endpoints.0)] += 1.0;
            a[(e, class.endpoints.1)] += 1.0;
        }
        a
    }

    fn ideal_incidence(&self) -> DMatrix<f64> {
        let full = self.incidence_matrix();
        let ideal = self.ideal_vertices();
        DMatrix::from_fn(self.edges.len(), ideal.len(), |e, j| full[(e, ideal[j])])
    }

    /// `l'(vv') = l(vv') + w(v) + w(v')`.
    pub fn apply_decoration(&self, m: &PolyhedralMetric, w: &DecorationVector) -> Result<PolyhedralMetric> {
        self.check_metric(m)?;
        if w.0.len() != self.kinds.len() {
            return Err(Error::Domain(format!(
                "decoration has {} entries, complex has {} vertex classes",
                w.0.len(),
                self.kinds.len()
            )));
        }
        if let Some(v) = (0..w.0.len()).find(|&v| self.kinds[v] == VertexKind::Hyperideal && w.0[v] != 0.0) {
            return Err(Error::Domain(format!("decoration is nonzero at hyperideal vertex class {v}")));
        }
        Ok(PolyhedralMetric(
            self.edges
                .iter()
                .enumerate()
                .map(|(e, c)| m.0[e] + w.0[c.endpoints.0] + w.0[c.endpoints.1])
                .collect(),
        ))
    }

    /// Least-squares decoration `w` with `m2 ≈ m1 + A w`, and the residual
    /// norm `|m2 − m1 − A w|`. Zero residual means the two metrics differ
    /// only by a change of horospheres.
    pub fn decoration_residual(&self, m1: &PolyhedralMetric, m2: &PolyhedralMetric) -> Result<(DecorationVector, f64)> {
        self.check_metric(m1)?;
        self.check_metric(m2)?;
        let b = DVector::from_iterator(self.edges.len(), (0..self.edges.len()).map(|e| m2.0[e] - m1.0[e]));
        let a = self.ideal_incidence();
        let ideal = self.ideal_vertices();
        let mut w = vec![0.0; self.kinds.len()];
        if ideal.is_empty() || self.edges.is_empty() {
            return Ok((DecorationVector(w), b.norm()));
        }
        let x = a
            .clone()
            .svd(true, true)
            .solve(&b, 1e-12)
            .map_err(|e| Error::Numeric(format!("least squares: {e}")))?;
        for (j, &v) in ideal.iter().enumerate() {
            w[v] = x[j];
        }
        Ok((DecorationVector(w), (b - a * x).norm()))
    }

    /// For each ideal vertex class (ascending), the sum of lengths of the
    /// edges ending there, an edge with both ends there counted twice.
    pub fn vertex_length_sums(&self, m: &PolyhedralMetric) -> Result<Vec<f64>> {
        self.check_metric(m)?;
        let a = self.ideal_incidence();
        Ok((a.transpose() * DVector::from_column_slice(&m.0)).iter().copied().collect())
    }

    /// Representative of `m` modulo decorations: the point of its
    /// decoration orbit closest to 0.
    pub fn decoration_normalized(&self, m: &PolyhedralMetric) -> Result<PolyhedralMetric> {
        let zero = PolyhedralMetric(vec![0.0; self.edges.len()]);
        let (w, _) = self.decoration_residual(&zero, m)?;
        let neg = DecorationVector(w.0.iter().map(|x| -x).collect());
        self.apply_decoration(m, &neg)
    }
}

/// Validate and build; see [`TriangulatedComplex::build`].
pub fn build_complex(g: GluingSpec) -> std::result::Result<TriangulatedComplex, ValidationError> {
    TriangulatedComplex::build(g)
}
