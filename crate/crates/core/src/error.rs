use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A single table cell failed validation.
    #[error("invalid table cell ({row}, {col}): {reason}")]
    InvalidCell {
        row: usize,
        col: usize,
        reason: String,
    },

    /// The table as a whole is malformed (shape, total).
    #[error("invalid table: {0}")]
    InvalidTable(String),

    /// Input could not be parsed at all.
    #[error("parse error: {0}")]
    Parse(String),

    /// The operation is not defined for this distribution family.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
