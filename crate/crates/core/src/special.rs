//! Milnor's Lobachevsky function
//!
//! `Λ(θ) = -∫₀^θ ln|2 sin t| dt`, evaluated through the Clausen function
//! `Λ(θ) = Cl₂(2θ) / 2`. After reducing `2θ` into `[-π, π]` the expansion
//!
//! ```text
//! Cl₂(t) = t - t ln|t| + t Σ_{k≥1} ζ(2k) / (k (2k+1)) · (t / 2π)^{2k}
//! ```
//!
//! converges like `4^{-k}`, so thirty terms reach double precision everywhere.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const TERMS: usize = 30;

/// ζ(2k) by a partial sum plus an Euler–Maclaurin tail.
fn zeta_even(k: usize) -> f64 {
    let s = 2.0 * k as f64;
    let n = 20.0_f64;
    let mut sum: f64 = (1..20).map(|j| (j as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // B_{2j} / (2j)!
    const B: [f64; 5] = [
        1.0 / 6.0 / 2.0,
        -1.0 / 30.0 / 24.0,
        1.0 / 42.0 / 720.0,
        -1.0 / 30.0 / 40320.0,
        5.0 / 66.0 / 3628800.0,
    ];
    // rising factorial s (s+1) ... (s+2j-2)
    let mut rising = s;
    for (j, b) in B.iter().enumerate() {
        let p = 2 * j + 1;
        sum += b * rising * n.powf(-s - p as f64);
        rising *= (s + p as f64) * (s + p as f64 + 1.0);
    }
    sum
}

fn coefficients() -> &'static [f64; TERMS] {
    static C: OnceLock<[f64; TERMS]> = OnceLock::new();
    C.get_or_init(|| {
        let mut c = [0.0; TERMS];
        for (i, slot) in c.iter_mut().enumerate() {
            let k = (i + 1) as f64;
            *slot = zeta_even(i + 1) / (k * (2.0 * k + 1.0));
        }
        c
    })
}

/// Clausen function on the principal range `|t| ≤ π`.
fn clausen_reduced(t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let x = (t / (2.0 * PI)).powi(2);
    // Horner from the tail
    let mut s = 0.0;
    for c in coefficients().iter().rev() {
        s = (s + c) * x;
    }
    t - t * t.abs().ln() + t * s
}

/// Representative of `theta` modulo π in `[-π/2, π/2]`.
fn reduce(theta: f64) -> f64 {
    theta - PI * (theta / PI).round()
}

/// Lobachevsky function Λ(θ). π-periodic and odd; exactly 0 on πℤ.
pub fn lobachevsky(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::Domain(format!("lobachevsky of non-finite {theta}")));
    }
    let r = reduce(theta);
    Ok(0.5 * clausen_reduced(2.0 * r))
}

/// Λ'(θ) = -ln|2 sin θ|.
pub fn lobachevsky_derivative(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::Domain(format!("lobachevsky derivative of non-finite {theta}")));
    }
    let r = reduce(theta);
    if r == 0.0 {
        return Err(Error::Singular { theta });
    }
    Ok(-(2.0 * r.sin().abs()).ln())
}

/// Λ for values already known to be finite (angles produced internally).
pub(crate) fn lam(theta: f64) -> f64 {
    0.5 * clausen_reduced(2.0 * reduce(theta))
}
