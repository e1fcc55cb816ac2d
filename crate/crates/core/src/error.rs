use thiserror::Error;

/// Errors produced by the modeling and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CqdError {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to converge or lost accuracy.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed input data; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Invalid configuration (unknown keys, bad values, unreadable file).
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl CqdError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        CqdError::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        CqdError::Numeric(msg.into())
    }
}

impl From<std::io::Error> for CqdError {
    fn from(e: std::io::Error) -> Self {
        CqdError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CqdError>;
