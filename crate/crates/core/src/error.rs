use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("symmetric eigensolver did not converge for dimension {dim} within {budget} iterations")]
    EigenNoConvergence { dim: usize, budget: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("cone `{0}` cannot be written in this format")]
    UnsupportedCone(String),

    #[error("missing variable family: {0}")]
    MissingVariable(String),

    #[error("problem has no Frobenius split; the perspective relaxation needs one")]
    NotSeparable,

    #[error("input violates the compact relaxation constraints (residual {0:.3e})")]
    InfeasibleInput(f64),

    #[error("upper bound must be positive, got {0}")]
    NonPositiveUpperBound(f64),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err(msg: impl Into<String>) -> Error {
    Error::DimensionMismatch(msg.into())
}
