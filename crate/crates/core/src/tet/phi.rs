//! φ-functions: closed forms equal to cos α on realizable lengths and
//! continuous on the whole closed box, which is what makes the angle
//! extension possible.

use std::f64::consts::LN_2;

use super::{
    clamp_truncated_edges, edge_index, opposite_edge, Angles6, DegenerationClass, EdgeLengths6,
    TetShape, EDGES,
};
use crate::error::{Error, Result};
use crate::lognum::LogNum;

/// Strict realizability keeps φ this far from ±1.
pub(crate) const STRICT_MARGIN: f64 = 1e-14;
/// Width of the boundary band in the classifier.
pub(crate) const BOUNDARY_EPS: f64 = 1e-9;

fn e(x: f64) -> LogNum {
    LogNum::exp(x)
}

/// `φ` for all six edges. Needs truncated edges `>= 0`.
pub fn phi(shape: TetShape, l: &EdgeLengths6) -> Result<[f64; 6]> {
    shape.check_box(l, false)?;
    let v = match shape.hyperideal_count() {
        0 => phi_ideal(l),
        2 => phi_two_two(l),
        3 => phi_three_one(l),
        _ => phi_link_law(shape, l),
    };
    let mut out = v.map(LogNum::to_f64);
    // exact value on a zero-length truncated edge; the formula only gets
    // within rounding of it and arccos would magnify that to ~1e-8
    for (e, x) in out.iter_mut().enumerate() {
        if shape.is_truncated_edge(e) && l.0[e] == 0.0 {
            *x = 1.0;
        }
    }
    Ok(out)
}

/// Ideal tetrahedron. With opposite-pair sums A (through this edge), B, C:
/// cos α = cosh((B-C)/2) - e^{A-(B+C)/2} / 2.
fn phi_ideal(l: &EdgeLengths6) -> [LogNum; 6] {
    let pair = |e: usize| l.0[e] + l.0[opposite_edge(e)];
    let mut out = [LogNum::ZERO; 6];
    for (ed, slot) in out.iter_mut().enumerate() {
        let a = pair(ed);
        let rest: Vec<f64> =
            (0..3).filter(|&p| p != ed.min(opposite_edge(ed))).map(pair).collect();
        let (b, c) = (rest[0], rest[1]);
        *slot = LogNum::cosh(0.5 * (b - c)) - e(a - 0.5 * (b + c) - LN_2);
    }
    out
}

/// Vertices 1,2 hyperideal, 3,4 ideal.
fn phi_two_two(l: &EdgeLengths6) -> [LogNum; 6] {
    let [l12, l13, l14, l23, l24, l34] = l.0;
    let ch = LogNum::cosh(l12);
    let sh2 = LogNum::sinh(l12).sq();
    let mut out = [LogNum::ZERO; 6];

    // products expanded so the cosh^2 - sinh^2 = 1 cancellation is exact
    let num12 = e(l13 + l14) + ch * (e(l13 + l24) + e(l23 + l14)) + e(l23 + l24)
        - LogNum::from_f64(2.0) * e(l34) * sh2;
    let den12 = ((e(2.0 * l23) + LogNum::from_f64(2.0) * e(l23 + l13) * ch + e(2.0 * l13))
        * (e(2.0 * l14) + LogNum::from_f64(2.0) * e(l24 + l14) * ch + e(2.0 * l24)))
        .sqrt();
    out[0] = num12 / den12;

    let num34 = e(l24 + l13) + e(l14 + l23) - LogNum::from_f64(2.0) * e(l34) * ch;
    let den34 = ((e(l24 + l23) + e(l34)) * (e(l14 + l13) + e(l34))).sqrt();
    out[5] = num34 / (LogNum::from_f64(2.0) * den34);

    let len = |a: usize, b: usize| l.0[edge_index(a, b)];
    for i in 0..2 {
        let j = 1 - i;
        for k in 2..4 {
            let h = 5 - k;
            let d = len(k, h) - len(i, k) - len(i, h);
            let chij = LogNum::cosh(len(i, j));
            let num = LogNum::from_f64(2.0) * e(d) * (e(len(j, k)) + e(len(i, k)) * chij)
                + e(len(j, k))
                - e(len(j, h) + len(i, k) - len(i, h));
            let den = ((e(2.0 * d) + e(d))
                * (e(2.0 * len(j, k))
                    + LogNum::from_f64(2.0) * e(len(i, k) + len(j, k)) * chij
                    + e(2.0 * len(i, k))))
            .sqrt();
            out[edge_index(i, k)] = num / (LogNum::from_f64(2.0) * den);
        }
    }
    out
}

/// Vertices 1,2,3 hyperideal, 4 ideal.
fn phi_three_one(l: &EdgeLengths6) -> [LogNum; 6] {
    let len = |a: usize, b: usize| l.0[edge_index(a, b)];
    let c = |a: usize, b: usize| LogNum::cosh(len(a, b));
    let s2 = |a: usize, b: usize| LogNum::sinh(len(a, b)).sq();
    let el = |a: usize| e(len(a, 3));
    let two = LogNum::from_f64(2.0);
    let mut out = [LogNum::ZERO; 6];
    let side = |i: usize, j: usize| {
        e(2.0 * len(j, 3)) + two * e(len(j, 3) + len(i, 3)) * c(i, j) + e(2.0 * len(i, 3))
    };
    for (i, j, k) in [(0, 1, 2), (1, 0, 2), (2, 0, 1)] {
        let num = el(j) * el(k) + el(i) * (el(k) * c(i, j) + el(j) * c(i, k) - el(i) * c(j, k));
        out[edge_index(i, 3)] = num / (side(i, j) * side(i, k)).sqrt();
    }
    for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
        // (e_j + e_i c_ij)(c_jk + c_ij c_ik) - (e_k + e_i c_ik) s_ij^2, expanded
        let num = el(j) * (c(j, k) + c(i, j) * c(i, k)) + el(i) * (c(i, j) * c(j, k) + c(i, k))
            - el(k) * s2(i, j);
        let q = s2(j, k) + c(i, j).sq() + c(i, k).sq() + two * c(j, k) * c(i, j) * c(i, k);
        out[edge_index(i, j)] = num / (q * side(i, j)).sqrt();
    }
    out
}

/// Gram entries in log form: `g = -G_ij` and `gap = g^2 - G_ii G_jj`.
struct LogGram {
    g: [[LogNum; 4]; 4],
    gap: [[LogNum; 4]; 4],
    diag: [f64; 4],
}

fn log_gram(shape: TetShape, l: &EdgeLengths6) -> LogGram {
    let mut g = [[LogNum::ZERO; 4]; 4];
    let mut gap = [[LogNum::ZERO; 4]; 4];
    let mut diag = [0.0; 4];
    for (v, d) in diag.iter_mut().enumerate() {
        *d = if shape.is_hyperideal(v) { 1.0 } else { 0.0 };
    }
    for (ed, &(i, j)) in EDGES.iter().enumerate() {
        let x = l.0[ed];
        let (val, gp) = match (shape.is_hyperideal(i), shape.is_hyperideal(j)) {
            (true, true) => (LogNum::cosh(x), LogNum::sinh(x).sq()),
            (false, false) => (e(x + LN_2), e(2.0 * (x + LN_2))),
            _ => (e(x), e(2.0 * x)),
        };
        g[i][j] = val;
        g[j][i] = val;
        gap[i][j] = gp;
        gap[j][i] = gp;
    }
    LogGram { g, gap, diag }
}

/// Corner angles of the vertex triangles, written directly in Gram
/// entries. Valid for every shape; used for 1-3 and 4-0.
pub(crate) fn phi_link_law(shape: TetShape, l: &EdgeLengths6) -> [LogNum; 6] {
    let gr = log_gram(shape, l);
    let (g, d) = (&gr.g, &gr.diag);
    let dd = |x: usize| LogNum::from_f64(d[x]);
    let two = LogNum::from_f64(2.0);
    let mut out = [LogNum::ZERO; 6];
    for (ed, &(i, j)) in EDGES.iter().enumerate() {
        let (v, w) = if shape.is_hyperideal(j) && !shape.is_hyperideal(i) { (j, i) } else { (i, j) };
        let o: Vec<usize> = (0..4).filter(|&z| z != v && z != w).collect();
        let (x, y) = (o[0], o[1]);
        out[ed] = if shape.is_hyperideal(v) {
            let num = g[w][x] * g[w][y]
                + g[v][w] * (g[w][x] * g[v][y] + g[w][y] * g[v][x])
                + dd(w) * (g[x][y] + g[v][x] * g[v][y])
                - g[v][w].sq() * g[x][y];
            let q = |p: usize| {
                gr.gap[w][p]
                    + two * g[w][p] * g[v][w] * g[v][p]
                    + dd(w) * g[v][p].sq()
                    + dd(p) * g[v][w].sq()
            };
            num / (q(x) * q(y)).sqrt()
        } else {
            let inv = |p: usize| LogNum::ONE / g[v][p];
            let side2 =
                |p: usize, q: usize| dd(p) * inv(p).sq() + dd(q) * inv(q).sq() + two * g[p][q] * inv(p) * inv(q);
            let num = dd(w) * inv(w).sq() + inv(w) * (g[w][x] * inv(x) + g[w][y] * inv(y))
                - g[x][y] * inv(x) * inv(y);
            num / (side2(w, x) * side2(w, y)).sqrt()
        };
    }
    out
}

fn strictly_inside(p: &[f64; 6]) -> bool {
    p.iter().all(|x| x.abs() < 1.0 - STRICT_MARGIN)
}

/// True iff the lengths describe an actual decorated tetrahedron.
pub fn is_realizable(shape: TetShape, l: &EdgeLengths6) -> bool {
    shape.in_box(l, true) && phi(shape, l).map(|p| strictly_inside(&p)).unwrap_or(false)
}

/// Dihedral angles of a realizable tetrahedron.
pub fn dihedral_angles_strict(shape: TetShape, l: &EdgeLengths6) -> Result<Angles6> {
    shape.check_box(l, true)?;
    let p = phi(shape, l)?;
    if !strictly_inside(&p) {
        return Err(Error::NotRealizable { shape, class: classify_degeneration(shape, l)? });
    }
    Ok(Angles6(p.map(f64::acos)))
}

/// Angles extended continuously to all finite lengths: clamp the truncated
/// edges, then take arccos of φ clipped to [-1, 1]. Degenerate regions get
/// angles 0 and π.
pub fn dihedral_angles_extended(shape: TetShape, l: &EdgeLengths6) -> Angles6 {
    let p = clamp_truncated_edges(shape, l);
    match phi(shape, &p) {
        Ok(v) => Angles6(v.map(|x| x.clamp(-1.0, 1.0).acos())),
        // only non-finite input gets here
        Err(_) => Angles6([f64::NAN; 6]),
    }
}

/// Which stratum of the closed box the lengths lie in.
pub fn classify_degeneration(shape: TetShape, l: &EdgeLengths6) -> Result<DegenerationClass> {
    let p = phi(shape, l)?;
    let lead = [0usize, 1, 2].map(|e| p[e].min(p[opposite_edge(e)]));
    let (worst, &value) = lead
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("three pairs");
    use DegenerationClass::*;
    if value < -1.0 - BOUNDARY_EPS {
        return Ok([Omega1, Omega2, Omega3][worst]);
    }
    if value <= -1.0 + BOUNDARY_EPS {
        return Ok([BoundaryX1, BoundaryX2, BoundaryX3][worst]);
    }
    if !shape.in_box(l, true) {
        return Ok(ZeroTruncatedEdge);
    }
    if strictly_inside(&p) {
        return Ok(InteriorL);
    }
    // some φ within 1e-9 of +1 only: its partner pair sits on the frontier
    let near_one = (0..6).max_by(|&a, &b| p[a].total_cmp(&p[b])).expect("six edges");
    let pair_of = |e: usize| e.min(opposite_edge(e));
    let others: Vec<usize> = (0..3).filter(|&q| q != pair_of(near_one)).collect();
    let q = if lead[others[0]] <= lead[others[1]] { others[0] } else { others[1] };
    Ok([BoundaryX1, BoundaryX2, BoundaryX3][q])
}
