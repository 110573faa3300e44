//! Co-volume `cov(l) = 2 vol + Σ α_ij l_ij`, whose gradient in `l` is the
//! angle vector.
//!
//! Off the realizable set the angles are replaced by their continuous
//! extension and `cov` is the line integral of `Σ α_ij dl_ij` from a fixed
//! realizable anchor. That 1-form is closed, so the path does not matter.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{Matrix6, SymmetricEigen};

use super::phi::{dihedral_angles_extended, dihedral_angles_strict, is_realizable, phi};
use super::volume::{lengths_from_angles, tet_volume};
use super::{clamp_truncated_edges, vertex_direction, Angles6, EdgeLengths6, TetShape};
use crate::error::{Error, Result};
use crate::quad::integrate;

fn dot(a: &Angles6, l: &EdgeLengths6) -> f64 {
    (0..6).map(|e| a.0[e] * l.0[e]).sum()
}

fn anchor_angles(shape: TetShape) -> Angles6 {
    let (q, t, e, h) = (PI / 4.0, PI / 3.0, 3.0 * PI / 8.0, PI / 2.0);
    Angles6(match shape.hyperideal_count() {
        0 => [t; 6],
        1 => [q, q, q, e, e, e],
        2 => [q, q, q, q, q, h],
        3 => [q, q, t, q, t, t],
        _ => [q; 6],
    })
}

struct Anchor {
    l: EdgeLengths6,
    cov: f64,
}

fn anchor(shape: TetShape) -> &'static Anchor {
    static ANCHORS: OnceLock<Vec<Anchor>> = OnceLock::new();
    let all = ANCHORS.get_or_init(|| {
        TetShape::ALL
            .iter()
            .map(|&s| {
                let a = anchor_angles(s);
                let l = lengths_from_angles(s, &a).expect("anchor angles bound a tetrahedron");
                let cov = 2.0 * tet_volume(s, &a).expect("anchor volume") + dot(&a, &l);
                Anchor { l, cov }
            })
            .collect()
    });
    &all[shape.hyperideal_count()]
}

/// Co-volume at any finite `l`: closed form on the realizable set, anchored
/// line integral of the extended angles elsewhere.
pub fn covolume(shape: TetShape, l: &EdgeLengths6) -> Result<f64> {
    if l.0.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("co-volume of non-finite lengths".into()));
    }
    if is_realizable(shape, l) {
        let a = dihedral_angles_strict(shape, l)?;
        return Ok(2.0 * tet_volume(shape, &a)? + dot(&a, l));
    }
    let base = anchor(shape);
    let d: Vec<f64> = (0..6).map(|e| l.0[e] - base.l.0[e]).collect();
    let scale = d.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let point = |t: f64| {
        let mut p = base.l;
        for e in 0..6 {
            p.0[e] += t * d[e];
        }
        p
    };
    let integrand = |t: f64| {
        let a = dihedral_angles_extended(shape, &point(t));
        (0..6).map(|e| a.0[e] * d[e]).sum::<f64>()
    };
    // The angles are smooth except where the path enters or leaves the
    // realizable set (square-root kinks) or a truncated edge crosses 0.
    // Putting those points at interval ends keeps the quadrature honest;
    // kink crossings are found by sampling and bisection.
    let mut cuts = vec![0.0, 1.0];
    for e in 0..6 {
        if shape.is_truncated_edge(e) && d[e] != 0.0 {
            let t = -base.l.0[e] / d[e];
            if t > 0.0 && t < 1.0 {
                cuts.push(t);
            }
        }
    }
    const SAMPLES: usize = 64;
    // which angles sit at 0 or π; clamped edges are always at 0 and are
    // already handled by the cuts above
    let inside = |t: f64| {
        let p = clamp_truncated_edges(shape, &point(t));
        let f = phi(shape, &p).unwrap_or([0.0; 6]);
        let mut code = 0u32;
        for e in 0..6 {
            if shape.is_truncated_edge(e) && p.0[e] == 0.0 {
                continue;
            }
            if f[e] <= -1.0 {
                code |= 1 << (2 * e);
            } else if f[e] >= 1.0 {
                code |= 2 << (2 * e);
            }
        }
        code
    };
    let mut prev = inside(0.0);
    for i in 1..=SAMPLES {
        let t1 = i as f64 / SAMPLES as f64;
        let now = inside(t1);
        if now != prev {
            let (mut lo, mut hi) = ((i - 1) as f64 / SAMPLES as f64, t1);
            while hi - lo > 1e-15 {
                let mid = 0.5 * (lo + hi);
                if inside(mid) == prev {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cuts.push(0.5 * (lo + hi));
        }
        prev = now;
    }
    cuts.sort_by(f64::total_cmp);
    let path: f64 = cuts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| integrate(integrand, w[0], w[1], 1e-13 * scale))
        .sum();
    if !path.is_finite() {
        return Err(Error::Numeric("co-volume line integral did not converge".into()));
    }
    Ok(base.cov + path)
}

/// Finite-difference Hessian of the co-volume (the Jacobian of the angle
/// map), with row `i` holding `∂α/∂l_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovolumeHessian {
    pub matrix: Matrix6<f64>,
    /// Set when some difference stencil left the realizable set and the
    /// extended angles had to be used.
    pub conditioning_warning: bool,
}

impl CovolumeHessian {
    /// Largest |H_ij - H_ji|.
    pub fn asymmetry(&self) -> f64 {
        (self.matrix - self.matrix.transpose()).abs().max()
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let sym = 0.5 * (self.matrix + self.matrix.transpose());
        let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Number of eigenvalues above `threshold`.
    pub fn rank(&self, threshold: f64) -> usize {
        self.eigenvalues().iter().filter(|&&x| x > threshold).count()
    }

    /// Euclidean norm of `H v`.
    pub fn apply_norm(&self, v: &[f64; 6]) -> f64 {
        (self.matrix * nalgebra::Vector6::from_row_slice(v)).norm()
    }
}

/// Central differences of the angles with step `h = 1e-5 · max(1, |l|∞)`,
/// Richardson-extrapolated from `h` and `h/2`.
pub fn covolume_hessian(shape: TetShape, l: &EdgeLengths6) -> Result<CovolumeHessian> {
    dihedral_angles_strict(shape, l)?;
    let h = 1e-5 * l.0.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut matrix = Matrix6::zeros();
    let mut warning = false;
    let mut angles = |p: &EdgeLengths6| match dihedral_angles_strict(shape, p) {
        Ok(a) => a,
        Err(_) => {
            warning = true;
            dihedral_angles_extended(shape, p)
        }
    };
    let mut central = |i: usize, step: f64| {
        let (mut up, mut down) = (*l, *l);
        up.0[i] += step;
        down.0[i] -= step;
        let (a, b) = (angles(&up), angles(&down));
        std::array::from_fn::<f64, 6, _>(|j| (a.0[j] - b.0[j]) / (2.0 * step))
    };
    for i in 0..6 {
        let (coarse, fine) = (central(i, h), central(i, 0.5 * h));
        for j in 0..6 {
            matrix[(i, j)] = (4.0 * fine[j] - coarse[j]) / 3.0;
        }
    }
    Ok(CovolumeHessian { matrix, conditioning_warning: warning })
}

/// Length changes caused by moving the horosphere at each ideal vertex.
pub fn decoration_directions(shape: TetShape) -> Vec<[f64; 6]> {
    shape.ideal_vertices().map(vertex_direction).collect()
}
