//! Crate-wide error type.

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Dimension or alignment mismatch between two operands.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An argument value outside an operation's domain.
    #[error("invalid argument: {0}")]
    Arg(String),

    /// Input text that does not follow the column format.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Unusable or inconsistent data (empty corpora, unknown training labels, ...).
    #[error("data error: {0}")]
    Data(String),

    /// Invalid configuration, or a model/config mismatch.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed or unsupported model/embedding container.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
