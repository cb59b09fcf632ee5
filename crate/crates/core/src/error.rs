use thiserror::Error;

/// Errors produced by the geometry, capacity, and fitting routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model failed validation at construction time.
    #[error("invalid model: {reason} (worst violation {violation:e})")]
    InvalidModel { reason: String, violation: f64 },

    /// The requested method is not available for this model family.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An operation precondition was not met.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// An iterative or adaptive numerical method did not converge.
    #[error("numerical failure: {message} (after {iterations} iterations, last relative change {last_change:e})")]
    Numerical {
        message: String,
        iterations: usize,
        last_change: f64,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
