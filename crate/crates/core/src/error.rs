use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{0}` must be strictly positive")]
    NonPositiveField(&'static str),

    #[error("parameter `{0}` must be finite")]
    NonFiniteField(&'static str),

    #[error("power vectors have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("total transmit power is zero")]
    ZeroPower,

    #[error("operation requires a single receive antenna (n_r = {n_r})")]
    NotMiso { n_r: usize },

    #[error("operation requires a single transmit antenna (n_t = {n_t})")]
    NotSimo { n_t: usize },

    #[error("no sign change found while bracketing {what}")]
    BracketFailure { what: String },

    #[error("simplex grid too large: n = {n}, resolution = {resolution}")]
    GridTooLarge { n: usize, resolution: u32 },

    #[error("no non-convexity witness at q = {q}")]
    NoWitness { q: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("evaluation failed: {0}")]
    EvaluationFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
