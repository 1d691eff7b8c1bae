use thiserror::Error;

/// Errors raised by sketch construction, updates, queries and merges.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value: {0}")]
    NonFinite(f64),
    #[error("order {0} exceeds the maximum supported order {max}", max = crate::basis::MAX_ORDER)]
    OrderTooLarge(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty input")]
    EmptyInput,
    #[error("sketch holds {have} observations, at least {need} required")]
    InsufficientObservations { have: u64, need: u64 },
    #[error("probability {0} is outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("batch updates are undefined for exponentially weighted sketches")]
    ExponentialBatch,
    #[error("incompatible sketches: {0}")]
    Incompatible(String),
    #[error("gauss-hermite nodes of order {0} failed to converge")]
    QuadratureConvergence(usize),
    #[error("sketch file: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_finite(x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(x))
    }
}
