use thiserror::Error;

pub type Result<T> = std::result::Result<T, DsbError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DsbError {
    /// A parameter violates its domain; `field` names the offending input.
    #[error("{field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("adaptive quadrature did not converge: error estimate {estimate:e} exceeds tolerance {tolerance:e} after {intervals} subintervals")]
    Convergence {
        estimate: f64,
        tolerance: f64,
        intervals: usize,
    },

    #[error("time {t} lies outside the tabulated horizon [0, {horizon}]")]
    HorizonExceeded { t: f64, horizon: f64 },

    #[error("step size underflow at t = {last_good_t} (step {step:e})")]
    StepUnderflow { last_good_t: f64, step: f64 },
}

impl DsbError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        DsbError::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
