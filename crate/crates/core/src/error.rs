use thiserror::Error;

use crate::solver::SolveResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("linear system is singular (pivot {pivot:e} at column {column})")]
    SingularSystem { column: usize, pivot: f64 },

    #[error("quadratic form is negative: {value:e}")]
    NegativeQuadratic { value: f64 },

    #[error("point is not in the interior of the cone (margin {margin:e})")]
    NotInterior { margin: f64 },

    #[error("point is not in the interior of the dual cone (margin {margin:e})")]
    NotInteriorDual { margin: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("shadow distance {delta:e} is outside the analysed region (limit {limit})")]
    OutOfAnalysisRegion { delta: f64, limit: f64 },

    #[error("step left the cone: {0}")]
    StepLeftCone(String),

    #[error("iteration limit of {limit} reached")]
    MaxIterationsExceeded {
        limit: usize,
        partial: Box<SolveResult>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown cone type `{0}`")]
    UnknownConeType(String),

    #[error("invalid cone: {0}")]
    InvalidCone(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
