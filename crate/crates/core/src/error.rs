use thiserror::Error;

use crate::tet::{DegenerationClass, TetShape};

/// Errors raised by the geometry kernel, the complex and the flow.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("Lobachevsky derivative is singular at {theta} (multiple of pi)")]
    Singular { theta: f64 },

    #[error("overflow evaluating edge {edge} of a {shape} tetrahedron")]
    Overflow { shape: TetShape, edge: &'static str },

    #[error("{shape} tetrahedron is not realizable ({class:?})")]
    NotRealizable { shape: TetShape, class: DegenerationClass },

    #[error("tetrahedron {tet} ({shape}) is not realizable ({class:?})")]
    TetNotRealizable { tet: usize, shape: TetShape, class: DegenerationClass },

    #[error("metric has {got} entries, complex has {expected} edge classes")]
    MetricLength { expected: usize, got: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid triangulation: {0}")]
    Validation(#[from] ValidationError),
}

/// Problems found while building a complex from gluing data.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ValidationError {
    #[error("cannot parse gluing data: {0}")]
    Parse(String),

    #[error("header says {declared} tetrahedra but {listed} are listed")]
    TetCount { declared: usize, listed: usize },

    #[error("tetrahedron {tet} lists {got} faces, expected 4")]
    FaceCount { tet: usize, got: usize },

    #[error("face {face} of tetrahedron {tet} is not glued")]
    UngluedFace { tet: usize, face: usize },

    #[error("face {face} of tetrahedron {tet} is glued to missing tetrahedron {target}")]
    TargetTet { tet: usize, face: usize, target: usize },

    #[error("face {face} of tetrahedron {tet} has a permutation that is not a bijection of 0..4")]
    BadPermutation { tet: usize, face: usize },

    #[error("face {face} of tetrahedron {tet}: permutation sends it to face {sent}, gluing names face {named}")]
    FaceMismatch { tet: usize, face: usize, sent: usize, named: usize },

    #[error("face {face} of tetrahedron {tet} is glued to itself by the identity")]
    TrivialSelfGluing { tet: usize, face: usize },

    #[error("gluing of face {face} of tetrahedron {tet} is not matched by the inverse gluing on the other side")]
    NotInvolutive { tet: usize, face: usize },

    #[error("edge {a}{b} of tetrahedron {tet}: the tetrahedra around it do not close up into a cycle")]
    NonCyclicEdge { tet: usize, a: usize, b: usize },

    #[error("vertex flag given for class {class}, but there are only {count} vertex classes")]
    UnknownVertexClass { class: usize, count: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
