use thiserror::Error;

/// Errors surfaced by the toolkit's numerical routines.
///
/// `Domain` and `InvalidParams` mean the caller asked for something outside a
/// function's contract; the remaining variants mean a numerical procedure hit
/// its configured limits and the result cannot be trusted.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{family} is unsupported for {op}")]
    UnsupportedFamily { family: &'static str, op: &'static str },

    #[error("Fock cutoff {cutoff} too small: neglected weight {weight:.3e} exceeds {limit:.1e}")]
    Truncation { cutoff: usize, weight: f64, limit: f64 },

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergent(String),

    #[error("probability density underflow ({0:.3e} < 1e-300)")]
    DensityUnderflow(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    /// True when the error indicates a numerical failure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Truncation { .. } | Error::QuadratureNonConvergent(_) | Error::DensityUnderflow(_)
        )
    }
}
