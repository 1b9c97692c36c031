use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside an operation's domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    /// The dense eigen/SVD backend failed to converge.
    #[error("numerical backend failure: {0}")]
    Backend(String),

    #[error("enumeration of {states} states exceeds budget of {budget}")]
    BudgetExceeded { states: u128, budget: u128 },

    #[error("rank-deficient input: {0}")]
    RankDeficient(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
