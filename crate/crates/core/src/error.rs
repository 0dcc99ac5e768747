use std::io;

use thiserror::Error;

/// Errors raised by the block-sparsity library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the operation's admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The input is outside the domain of the operation (e.g. a zero signal).
    #[error("domain error: {0}")]
    Domain(String),

    /// A formula could not be evaluated at the requested point.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// The data carry no information for the estimator (e.g. all measurements zero).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True when the failure stems from the data rather than from the caller's arguments.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::Degenerate(_) | Error::Evaluation(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
