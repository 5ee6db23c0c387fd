use thiserror::Error;

/// Errors raised by the pathwise calculus routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Sample data violating the path invariants.
    #[error("invalid path: {0}")]
    InvalidPath(String),
    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed configuration or parameter value.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The requested resolution would exceed the stop-count limit.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    /// Two computations that must agree by construction did not.
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($fmt:tt)+) => {
        if !($cond) {
            return Err($crate::error::Error::$variant(format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure;
