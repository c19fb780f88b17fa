use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("solver step {dt} exceeds grid spacing {spacing}")]
    StepExceedsGrid { dt: f64, spacing: f64 },

    #[error("norm drift {drift:.3e} at t = {t} exceeds {limit:.1e}; reduce the step")]
    NormDrift { drift: f64, t: f64, limit: f64 },

    #[error("followed eigenbranch lost at t = {t} (eigenvalue {value:.3e})")]
    BranchLoss { t: f64, value: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Config errors are the caller's fault; everything else is numerical.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::Config(_) | Error::StepExceedsGrid { .. }
        )
    }
}
