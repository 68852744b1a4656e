use thiserror::Error;

use crate::levy_model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{quantity} diverges for this jump measure: {reason}")]
    MomentDivergence {
        quantity: &'static str,
        reason: String,
    },

    #[error("Re(w) = {re} lies outside the admissible strip ({lo}, {hi})")]
    StripViolation { re: f64, lo: f64, hi: f64 },

    #[error("model fails the standing assumptions: {0}")]
    Validation(Box<ValidationReport>),

    #[error("invalid Fourier grid: {0}")]
    Grid(String),

    #[error(
        "transform not converged at tau = {tau}: doubling u_max moved the value by {change:e} (tolerance {tolerance:e})"
    )]
    NotConverged {
        tau: f64,
        change: f64,
        tolerance: f64,
    },

    #[error("strike {strike} lies outside the covered log-strike window [{lo}, {hi}] for spot {spot}")]
    StrikeOutOfWindow {
        strike: f64,
        spot: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid observed path: {0}")]
    InvalidPath(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("simulation: {0}")]
    Simulation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("model spec: {0}")]
    Spec(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
