use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoarseError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("validation failed: {check}: {witness}")]
    Validation { check: String, witness: String },
    #[error("construction error: {0}")]
    Construction(String),
    #[error("basis in degree {degree} has {size} elements, cap is {cap}")]
    Resource { degree: usize, size: usize, cap: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CoarseError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(CoarseError::Domain(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(CoarseError::Precondition(msg.into()))
}
