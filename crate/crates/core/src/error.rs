use thiserror::Error;

/// Which end of an open interval was crossed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Bound {
    Lower,
    Upper,
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Lower => f.write_str("lower"),
            Bound::Upper => f.write_str("upper"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("price gap {gap} violates the {bound} bound of the validity interval ({lo}, {hi})")]
    PriceGapOutOfRange {
        gap: f64,
        lo: f64,
        hi: f64,
        bound: Bound,
    },

    #[error("price {price} of operator {operator} at t = {t} lies outside the strategy space [0, {max}]")]
    PriceOutOfStrategySpace {
        operator: u8,
        t: f64,
        price: f64,
        max: f64,
    },

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("time {t} outside [{lo}, {hi}]")]
    TimeOutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("quadrature did not reach tolerance {requested:e} (achieved error estimate {achieved:e})")]
    Quadrature { requested: f64, achieved: f64 },

    #[error("singular stage game at backward step {step}")]
    SingularStage { step: usize },

    #[error("value function diverged at backward step {step} (|a| = {magnitude:e})")]
    ValueDivergence { step: usize, magnitude: f64 },

    #[error("infinite-horizon value iteration did not converge in {steps} steps (last change {change:e})")]
    NotConverged { steps: usize, change: f64 },

    #[error("degenerate bid support: opponent value {upper} is not above reserve {reserve}")]
    DegenerateSupport { reserve: f64, upper: f64 },

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("configuration error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("oracle verification failed: {0}")]
    OracleFailed(String),

    #[error("output error: {0}")]
    Output(String),
}

impl Error {
    /// Whether the error stems from user-supplied inputs rather than the solvers.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. } | Error::Config { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
