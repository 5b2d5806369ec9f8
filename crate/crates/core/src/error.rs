//! Error type shared by every module of the library.

use thiserror::Error;

/// Errors raised by the simulator and its numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Arguments are inconsistent or violate a type invariant.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configuration value is out of range or unresolved by the grid.
    #[error("configuration error: {0}")]
    Config(String),
    /// An iterative numerical procedure failed to meet its tolerance.
    #[error("numerical error: {message}")]
    Numerical {
        /// Human-readable description.
        message: String,
        /// Key/value diagnostics for the failing computation.
        diagnostics: Vec<(String, f64)>,
    },
    /// The operation is not available for this group or dimension.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Filesystem or serialization failure.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Convenience alias.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
