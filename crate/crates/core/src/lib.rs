//! Decorated hyperbolic polyhedral metrics on triangulated pseudo
//! 3-manifolds and the extended combinatorial Ricci flow.
//!
//! - [`special`]: Lobachevsky function.
//! - [`tet`]: geometry of one decorated tetrahedron (angles, φ-functions,
//!   volume, co-volume) for all five ideal/hyperideal vertex mixes.
//! - [`complex`]: gluing data, edge and vertex classes, curvature.
//! - [`flow`]: the Ricci flow ODE, its H-functional and reports.

// edge-indexed loops mirror the formulas more closely than iterator chains
#![allow(clippy::needless_range_loop)]

pub mod complex;
pub mod error;
pub mod flow;
mod lognum;
mod quad;
pub mod special;
pub mod tet;

pub use error::{Error, Result};
pub use quad::integrate;
