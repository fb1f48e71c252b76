use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: String, iterations: usize },

    /// The result does not fit in an `f64`.
    #[error("saturated: {0}")]
    Saturation(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// An algebraically equivalent but numerically unstable form was
    /// requested in a regime where it loses all significant digits.
    #[error("cancellation: {0}")]
    Cancellation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn non_convergence(what: impl Into<String>, iterations: usize) -> Self {
        Error::NonConvergence {
            what: what.into(),
            iterations,
        }
    }
}
