//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The parameter regime does not support the requested quantity
    /// (e.g. a moment that only exists in the non-explosive regime).
    #[error("regime error: {0}")]
    Regime(String),

    /// Structurally invalid input (lengths, signs, model/scheme mismatch).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// An iterative procedure did not converge within its budget.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A root bracket could not be established on the search interval.
    #[error("no sign change on [{lo}, {hi}]: {what}")]
    NoSignChange { what: String, lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn regime(msg: impl Into<String>) -> Self {
        Error::Regime(msg.into())
    }
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
