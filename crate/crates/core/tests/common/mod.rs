#![allow(dead_code)]

use std::path::PathBuf;

use crf_core::complex::{build_complex, GluingSpec, TriangulatedComplex};
use crf_core::tet::{is_realizable, EdgeLengths6, TetShape};
use rand::Rng;

pub fn fixture(name: &str) -> TriangulatedComplex {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    build_complex(GluingSpec::from_json(&text).unwrap()).unwrap()
}

pub fn figure_eight() -> TriangulatedComplex {
    fixture("figure_eight.json")
}

/// Lengths with truncated edges in `(0.05, 2.5)` and the rest in `(-1.5, 1.5)`.
pub fn random_lengths<R: Rng>(rng: &mut R, shape: TetShape) -> EdgeLengths6 {
    EdgeLengths6(std::array::from_fn(|e| {
        if shape.is_truncated_edge(e) {
            rng.gen_range(0.05..2.5)
        } else {
            rng.gen_range(-1.5..1.5)
        }
    }))
}

/// Rejection sample of a realizable length vector.
pub fn random_realizable<R: Rng>(rng: &mut R, shape: TetShape) -> EdgeLengths6 {
    loop {
        let l = random_lengths(rng, shape);
        if is_realizable(shape, &l) {
            return l;
        }
    }
}

/// `Λ(θ) = −∫₀^θ ln|2 sin t| dt` for `0 < θ ≤ π/2`, by composite Simpson on
/// the smooth part after removing the `ln t` singularity analytically.
pub fn lobachevsky_oracle(theta: f64) -> f64 {
    let f = |t: f64| if t == 0.0 { 2f64.ln() } else { (2.0 * t.sin() / t).ln() };
    let n = 4000;
    let h = theta / n as f64;
    let mut s = f(0.0) + f(theta);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    let smooth = s * h / 3.0;
    -(smooth + theta * theta.ln() - theta)
}
