//! Error types for model construction and planning queries.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Domain errors raised by constructors and the inverse planning queries.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violated its domain constraint.
    #[error("{name} must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    /// The improvement factor is undefined when the baseline sensed
    /// fraction is zero (density or native radius is zero).
    #[error("improvement factor undefined: density and sensing radius must both be positive")]
    DegenerateBaseline,

    /// A target fraction outside the open interval (0, 1).
    #[error("target fraction must be strictly between 0 and 1, got {0}")]
    TargetOutOfRange(f64),

    /// The effective sensing radius is zero, so no density reaches the target.
    #[error("effective sensing radius is zero; no density can reach the target")]
    ZeroEffectiveRadius,

    /// No density attains the requested improvement factor.
    #[error("improvement factor {target} is unattainable; the reachable range is (1, {limit})")]
    UnattainableImprovement { target: f64, limit: f64 },
}
