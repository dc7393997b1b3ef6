use thiserror::Error;

/// Errors raised anywhere in the gate simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GateError {
    #[error("invalid cavity parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("state norm {norm:e} is below 1e-12, cannot normalize")]
    ZeroNorm { norm: f64 },

    #[error("cutoff {cutoff} too small: truncation deficit {deficit:e} exceeds bound {bound:e}")]
    CutoffTooSmall { cutoff: usize, deficit: f64, bound: f64 },

    #[error("validation failed on branch {branch}: deviation {deviation:e} exceeds {tolerance:e}")]
    Validation {
        branch: String,
        deviation: f64,
        tolerance: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = GateError> = std::result::Result<T, E>;
