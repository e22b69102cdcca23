use thiserror::Error;

use crate::integrate::{Termination, Trajectory};

/// Errors raised by chart evaluation, integration and fitting.
#[derive(Debug, Error)]
pub enum Error {
    /// A coordinate or parameter lies outside the region where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The chart data violates one of its structural invariants (ρ sign, SPD, κ > 0).
    #[error("chart integrity: {0}")]
    ChartIntegrity(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    /// w⁰ ≤ 0 or ζ₀ ≤ 0: the state can no longer be parametrized by x⁰.
    #[error("state left the inbound regime: {0}")]
    NotInbound(String),

    #[error("ill-conditioned fit window (condition {0:.3e})")]
    IllConditioned(f64),

    /// An integration stopped for a reason other than the one the caller asked for.
    /// The partial trajectory is attached when available.
    #[error("integration terminated with {termination}: {context}")]
    Integration {
        termination: Termination,
        context: String,
        partial: Option<Box<Trajectory>>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
