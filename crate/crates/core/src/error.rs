use thiserror::Error;

/// Errors raised by the numerical kernels and distribution constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("unsupported exponential-integral order {0}")]
    UnsupportedOrder(i64),

    #[error("unsupported dimension {0} for deterministic sphere quadrature")]
    UnsupportedDimension(usize),

    #[error("quadrature did not converge: estimate {value:e}, error {abs_error:e}")]
    QuadratureNonConvergence { value: f64, abs_error: f64 },

    #[error("rejection sampler exceeded {0} proposals for a single draw")]
    SamplerStall(u64),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
