use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("insufficient time window: need {needed} levels, have {have}")]
    InsufficientWindow { needed: usize, have: usize },

    #[error("empty valid region: {0}")]
    EmptyValidRegion(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("characteristics crossed at t = {t}")]
    CrossedCharacteristics { t: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("too few samples: need {needed}, have {have}")]
    TooFewSamples { needed: usize, have: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("nonlinearity grammar error at line {line}: {msg}")]
    Grammar { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
