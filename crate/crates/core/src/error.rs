use thiserror::Error;

/// Errors raised by loss construction, evaluation and the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("entry {index} is invalid: {value}")]
    InvalidEntry { index: usize, value: f64 },

    #[error("point must be strictly positive (entry {index} = {value})")]
    NotStrictlyPositive { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Bayes risk is not finite near the evaluation point")]
    NonFiniteRisk,

    #[error("degenerate supergradient: <g, p> = {0}")]
    DegenerateSupergradient(f64),

    #[error("grid resolution must be at least 2, got {0}")]
    ResolutionTooSmall(usize),

    #[error("point is not in the superprediction set (antigauge {antigauge} < 1)")]
    NotSuperprediction { antigauge: f64 },

    #[error("Bayes risk vanishes along every feasible direction")]
    VanishingRisk,

    #[error("optimization budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("optimizer did not converge (gap {gap:e})")]
    NonConvergence { gap: f64 },

    #[error("loss is not strictly proper: {0}")]
    NotStrictlyProper(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
