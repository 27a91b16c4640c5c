use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A caller violated an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),
    /// Malformed or inconsistent input data.
    #[error("input error: {0}")]
    Input(String),
    /// An enumeration cap was exceeded.
    #[error("cap exceeded: {0}")]
    Cap(String),
    /// A witness or decomposition failed validation.
    #[error("validation failed: {0}")]
    Validation(String),
    /// A mathematical invariant that should be impossible to break was broken.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
