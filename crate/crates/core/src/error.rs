use thiserror::Error;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Inconsistent or out-of-range configuration (grid, grating, geometry).
    #[error("configuration error: {0}")]
    Config(String),
    /// A precondition of an operation was not met by its caller.
    #[error("contract violation: {0}")]
    Contract(String),
    /// An argument lies outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// The data carries no usable signal (zero flux, closed gratings).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// An iterative numerical method did not reach its tolerance.
    #[error("numerical failure: {0}")]
    Numeric(String),
    /// The requested evaluation path does not exist for this input.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
