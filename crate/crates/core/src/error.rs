use thiserror::Error;

/// Errors raised by the linear-algebra substrate and the operators built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} is {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e}, allowed {allowed:e})")]
    NotSymmetric { asymmetry: f64, allowed: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("eigen-iteration did not converge within {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("map is rank deficient: sigma_min/sigma_max = {ratio:e}")]
    RankDeficient { ratio: f64 },

    #[error("decomposition does not cover index {missing}")]
    NotCovering { missing: usize },

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("invalid problem spec: {0}")]
    InvalidSpec(String),

    #[error("operator is not self-adjoint for the given inner product (asymmetry {asymmetry:e})")]
    NotSelfAdjoint { asymmetry: f64 },

    #[error("certification routes disagree: {route} residual {residual:e} exceeds {tolerance:e}")]
    CertificationFailed {
        route: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(expected: impl ToString, got: impl ToString) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        got: got.to_string(),
    }
}
