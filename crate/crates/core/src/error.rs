use thiserror::Error;

/// Errors raised by evaluation, simulation and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series, quadrature or iteration could not reach the requested accuracy.
    #[error("convergence failure in {routine}: {detail}")]
    Convergence { routine: &'static str, detail: String },

    /// The moment equations have no solution in the admissible parameter region.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// The input data are degenerate for the requested estimator.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Malformed configuration or input file.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn convergence(routine: &'static str, detail: impl Into<String>) -> Self {
        Error::Convergence {
            routine,
            detail: detail.into(),
        }
    }

    /// True for failures that indicate a numerical problem rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::NoSolution(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
