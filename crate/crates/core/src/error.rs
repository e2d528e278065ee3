use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("unknown dimension tag `{0}`")]
    UnknownDimension(String),

    #[error("mixing Hamiltonian is not CPT symmetric: {0}")]
    NotCptSymmetric(String),

    #[error("mixing Hamiltonian is not Hermitian: {0}")]
    NotHermitian(String),

    #[error("vanishing denominator in {0}")]
    VanishingDenominator(&'static str),

    #[error("both oscillation probabilities underflow at t = {0}")]
    ProbabilityUnderflow(f64),

    #[error("quadrature did not converge: estimated error {estimate:e} above tolerance {tolerance:e}")]
    QuadratureNonConvergence { estimate: f64, tolerance: f64 },

    #[error("nonlinear corrector did not converge after {passes} passes (last change {change:e})")]
    NonlinearNonConvergence { passes: usize, change: f64 },

    #[error("wave functions live on different grids")]
    GridMismatch,

    #[error("config line {line}: {reason}")]
    MalformedConfig { line: usize, reason: String },

    #[error("unknown config key `{0}`")]
    UnknownConfigKey(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {value}")))
    }
}
