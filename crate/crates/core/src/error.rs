//! Error types shared across the library.

use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("series did not converge: {0}")]
    NonConvergence(String),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("boundary singularity: {0}")]
    BoundarySingularity(String),
    #[error("differentiation order {requested} exceeds the cap {cap}")]
    DifferentiationDepthExceeded { requested: usize, cap: usize },
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// True for errors caused by bad user input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Invalid(_) | Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
