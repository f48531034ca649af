use num_complex::Complex64;
use thiserror::Error;

/// Failure modes shared by every computation in the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A denominator of a resolvent-type expression vanished at `s`.
    #[error("pole at s = {s}")]
    Pole { s: Complex64 },

    #[error("series did not reach tolerance {tol:e} within {terms} terms")]
    SeriesBudget { terms: usize, tol: f64 },

    #[error("no bracketing sign change in window [{lo}, {hi}]: {what}")]
    Search { lo: f64, hi: f64, what: String },

    #[error("eigensolver did not converge for a {size}x{size} matrix")]
    Convergence { size: usize },

    #[error("non-finite value at step {last_valid} of the time grid")]
    NonFinite { last_valid: usize },

    #[error("iteration diverged: {0}")]
    Divergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
