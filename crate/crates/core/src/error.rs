use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure at iteration {iteration}: {message}")]
    Numerical { iteration: usize, message: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("metagame solver did not converge: exploitability {exploitability:.3e} after {iterations} iterations")]
    NonConvergence {
        exploitability: f64,
        iterations: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn numerical(iteration: usize, msg: impl Into<String>) -> Error {
    Error::Numerical {
        iteration,
        message: msg.into(),
    }
}
