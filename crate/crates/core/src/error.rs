use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: unknown ids, bad JSON shapes, parameters out of range.
    #[error("input error: {0}")]
    Input(String),
    /// Well-formed input that violates a structural invariant.
    #[error("validation error: {0}")]
    Validation(String),
    /// The finite window is too small to decide the question.
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("state space of {size} configurations exceeds the cap of {cap}")]
    CapExceeded { size: u128, cap: u128 },
    /// A consistency check inside a pipeline failed; carries a witness.
    #[error("internal check failed: {0}")]
    Internal(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn inconclusive(msg: impl Into<String>) -> Self {
        Error::Inconclusive(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
