use thiserror::Error;

/// Errors raised by problems, steppers and the analysis layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The reference energy is zero, so the relative error is undefined.
    /// `absolute` carries `H(y) - e0` for callers that fall back to it.
    #[error(
        "reference energy is zero; relative energy error undefined (absolute error {absolute:e})"
    )]
    ZeroReferenceEnergy { absolute: f64 },

    #[error("metric unavailable: {0}")]
    UnsupportedMetric(&'static str),

    #[error("unsupported order {order} (supported: {supported})")]
    UnsupportedOrder {
        order: usize,
        supported: &'static str,
    },

    #[error("stage solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("step {step} at t = {t} failed after {iterations} iterations (residual {residual:e})")]
    StepFailure {
        step: usize,
        t: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("non-finite state produced at step {step}")]
    NonFinite { step: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
