use thiserror::Error;

/// Errors produced by the model, integrators and estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error(
        "degenerate dressed-state mixing: min(sin²θ, cos²θ) = {min_weight:e} is below {threshold:e}"
    )]
    DegenerateMixing { min_weight: f64, threshold: f64 },

    #[error("degenerate steady state: {0}")]
    DegenerateSteadyState(String),

    #[error("integration failed at t = {time}: state became non-finite")]
    IntegrationFailure { time: f64 },

    #[error("under-resolved grid: {0}")]
    Resolution(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("photon stream format error at line {line}: {reason}")]
    StreamFormat { line: usize, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IntegrationFailure { .. } | Error::DegenerateSteadyState(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
