use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("parse error at line {line}: {message}")]
    ParseLine { line: usize, message: String },

    #[error("dimension mismatch in layer {layer}: {message}")]
    LayerDimension { layer: usize, message: String },

    #[error("non-finite entry in layer {layer}")]
    NonFinite { layer: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear program exceeded the iteration limit ({0} pivots)")]
    IterationLimit(usize),

    #[error("inequality system is infeasible")]
    Infeasible,

    #[error("region is not full-dimensional (Chebyshev radius {radius:e})")]
    Degenerate { radius: f64 },

    #[error("point lies on a region boundary (node {node}, pre-activation {value:e})")]
    OnBoundary { node: usize, value: f64 },

    #[error("region for bit vector {bits} failed: {source}")]
    RegionFailure {
        bits: String,
        #[source]
        source: Box<Error>,
    },

    #[error("unusable seed point: {0}")]
    Seed(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
