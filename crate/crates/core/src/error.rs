use thiserror::Error;

/// Errors raised by the interferometer model, the estimators and the Fock-space oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("configuration is not balanced (requires g1 == g2 and theta2 - theta1 == pi)")]
    NotBalanced,

    #[error("negative variance {0:e} beyond round-off")]
    NegativeVariance(f64),

    #[error("degenerate noise: variance is zero")]
    DegenerateNoise,

    #[error("degenerate marginal: variances must be positive (got {var_a:e}, {var_b:e})")]
    DegenerateMarginal { var_a: f64, var_b: f64 },

    #[error("correlation coefficient {0} outside [-1, 1]")]
    CorrelationOutOfRange(f64),

    #[error("no finite sensitivity in bracket [{lo}, {hi}]")]
    NoFiniteSensitivity { lo: f64, hi: f64 },

    #[error("truncation rejected: |alpha|^2 = {alpha_sq} exceeds cutoff/2 (cutoff {cutoff})")]
    TruncationRejected { alpha_sq: f64, cutoff: usize },

    #[error("truncation overflow: trace deficit {deficit:e} exceeds budget {budget:e} at cutoff {cutoff}")]
    TruncationOverflow { deficit: f64, budget: f64, cutoff: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
