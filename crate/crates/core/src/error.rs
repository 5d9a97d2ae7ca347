use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("value not representable without scaling: exponent {exponent} exceeds {limit}")]
    Overflow { exponent: f64, limit: f64 },

    #[error("quadrature for {what} did not converge: estimate {estimate:e}, error bound {error:e}")]
    Quadrature {
        what: String,
        estimate: f64,
        error: f64,
    },

    #[error("integral diverges: {0}")]
    Divergence(String),

    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("lattice operator is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("{what} not converged under refinement: relative change {change:e}")]
    Refinement { what: String, change: f64 },

    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
