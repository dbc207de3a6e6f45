use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for dataset of {len} samples")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid label {0}: labels must be -1 or +1")]
    InvalidLabel(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("group {0} is absent from the data")]
    MissingGroup(usize),

    #[error("statistical rate requires exactly 2 sensitive categories, got {0}")]
    GroupCount(usize),

    #[error("{0} loss has no gradient")]
    NotDifferentiable(&'static str),

    #[error("negative RKHS norm {0}: kernel is not positive semidefinite on these anchors")]
    NegativeNorm(f64),

    #[error("certification requires lambda > 0")]
    ZeroLambda,

    #[error("solver did not converge: stationarity gap {gap:e}, constraint violation {violation:e} after {iterations} iterations")]
    NonConvergence {
        gap: f64,
        violation: f64,
        iterations: usize,
    },

    #[error("operation requires a linear model")]
    NotLinear,
}

pub type Result<T> = std::result::Result<T, Error>;
