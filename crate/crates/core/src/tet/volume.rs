//! Volumes from dihedral angles.
//!
//! Closed forms for every shape but 4-0 are sums of Lobachevsky values. At a
//! hyperideal vertex with angles `x, y` to two vertices and `z` to the third
//! the group
//!
//! ```text
//! G(x, y; z) = Σ_{s,t = ±1} Λ((π + s·x + t·y − z) / 2)
//! ```
//!
//! appears; as the vertex becomes ideal it tends to `Λ(x) + Λ(y) − Λ(z)`.
//! The 4-0 volume is obtained by integrating the Schläfli formula
//! `dV = -½ Σ l_ij dα_ij` from the regular ideal octahedron (all angles 0).

use std::f64::consts::PI;

use nalgebra::Matrix4;

use super::{edge_index, opposite_edge, Angles6, EdgeLengths6, TetShape, EDGES};
use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::special::lam;

const ANGLE_TOL: f64 = 1e-8;

fn group(x: f64, y: f64, z: f64) -> f64 {
    let mut s = 0.0;
    for a in [1.0, -1.0] {
        for b in [1.0, -1.0] {
            s += lam(0.5 * (PI + a * x + b * y - z));
        }
    }
    s
}

fn check_angles(shape: TetShape, a: &Angles6) -> Result<()> {
    if let Some(e) = a.0.iter().position(|x| !x.is_finite() || *x < -ANGLE_TOL || *x > PI + ANGLE_TOL) {
        return Err(Error::Domain(format!("angle {} = {} outside [0, π]", e, a.0[e])));
    }
    for v in 0..4 {
        let s = a.vertex_sum(v);
        let ok = if shape.is_hyperideal(v) { s <= PI + ANGLE_TOL } else { (s - PI).abs() <= ANGLE_TOL };
        if !ok {
            return Err(Error::Domain(format!(
                "angle sum {s} at vertex {} is not admissible for a {shape} tetrahedron",
                v + 1
            )));
        }
    }
    Ok(())
}

/// Hyperbolic volume of the (truncated) tetrahedron with angles `alpha`.
pub fn tet_volume(shape: TetShape, alpha: &Angles6) -> Result<f64> {
    check_angles(shape, alpha)?;
    let [a12, a13, a14, a23, a24, a34] = alpha.0;
    let v = match shape.hyperideal_count() {
        0 => lam(a12) + lam(a13) + lam(a14),
        1 => 0.5 * (lam(a12) + lam(a13) + lam(a14) + 2.0 * lam(a23) + group(a12, a13, a14)),
        2 => {
            0.5 * (lam(a13) + lam(a14) + lam(a23) + lam(a24)
                + group(a12, a13, a14)
                + group(a12, a23, a24))
        }
        3 => {
            0.5 * (lam(a14) + lam(a24) + lam(a34)
                + group(a12, a13, a14)
                + group(a12, a23, a24)
                + group(a13, a23, a34))
        }
        _ => schlafli_volume(shape, alpha)?,
    };
    Ok(v.max(0.0))
}

/// Edge lengths of the tetrahedron with angles `alpha` (in the open angle
/// polytope). Horospheres at ideal vertices get a fixed normalization.
pub fn lengths_from_angles(shape: TetShape, alpha: &Angles6) -> Result<EdgeLengths6> {
    // Gram matrix of the face normals; face k is opposite vertex k
    let mut gamma = Matrix4::<f64>::identity();
    for (e, &(i, j)) in EDGES.iter().enumerate() {
        let (k, h) = EDGES[opposite_edge(e)];
        let c = -alpha.0[edge_index(i, j)].cos();
        gamma[(k, h)] = c;
        gamma[(h, k)] = c;
    }
    let g = gamma
        .try_inverse()
        .ok_or_else(|| Error::Numeric("singular face Gram matrix".into()))?;
    let mut l = [0.0; 6];
    for (e, &(i, j)) in EDGES.iter().enumerate() {
        let gij = -g[(i, j)];
        l[e] = match (shape.is_hyperideal(i), shape.is_hyperideal(j)) {
            (true, true) => (gij / (g[(i, i)] * g[(j, j)]).sqrt()).acosh(),
            (true, false) => (gij / g[(i, i)].sqrt()).ln(),
            (false, true) => (gij / g[(j, j)].sqrt()).ln(),
            (false, false) => (0.5 * gij).ln(),
        };
    }
    if let Some(e) = l.iter().position(|x| !x.is_finite()) {
        return Err(Error::Domain(format!(
            "angles {:?} do not bound a {shape} tetrahedron (edge {})",
            alpha.0,
            e
        )));
    }
    Ok(EdgeLengths6(l))
}

/// Volume by integrating the Schläfli formula along the straight angle path
/// from a reference: the regular ideal octahedron (angles 0) for 4-0, the
/// regular ideal tetrahedron (angles π/3) otherwise.
pub fn schlafli_volume(shape: TetShape, alpha: &Angles6) -> Result<f64> {
    check_angles(shape, alpha)?;
    let (start, v0) = if shape == TetShape::HYPERIDEAL {
        ([0.0; 6], 8.0 * lam(PI / 4.0))
    } else {
        ([PI / 3.0; 6], 3.0 * lam(PI / 3.0))
    };
    let d: Vec<f64> = (0..6).map(|e| alpha.0[e] - start[e]).collect();
    let failure = std::cell::RefCell::new(None);
    // t = u^2 tames the logarithmic growth of lengths near the reference
    let integral = integrate(
        |u| {
            let t = u * u;
            let mut a = [0.0; 6];
            for e in 0..6 {
                a[e] = start[e] + t * d[e];
            }
            match lengths_from_angles(shape, &Angles6(a)) {
                Ok(l) => -0.5 * (0..6).map(|e| l.0[e] * d[e]).sum::<f64>() * 2.0 * u,
                Err(err) => {
                    failure.borrow_mut().get_or_insert(err);
                    0.0
                }
            }
        },
        0.0,
        1.0,
        1e-12,
    );
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    Ok(v0 + integral)
}
