use thiserror::Error;

/// Errors produced by the channel, impairment, metric and experiment layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its documented domain. `key` names the offending
    /// parameter so configuration front-ends can point at it.
    #[error("invalid value for `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    /// A requested image rejection ratio cannot be reached at the given phase error.
    #[error("image rejection ratio {requested_db:.3} dB is infeasible at phase error {phase_rad:.6} rad (maximum {max_db:.3} dB)")]
    InfeasibleIrr {
        requested_db: f64,
        phase_rad: f64,
        max_db: f64,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Linear algebra or extrapolation failure.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("user placement failed: {0}")]
    Placement(String),

    #[error("i/o failure on {path}: {reason}")]
    Io { path: String, reason: String },
}

impl Error {
    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
