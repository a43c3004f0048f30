use thiserror::Error;

/// Error type shared by the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Alpha numbers divide by the ball mass, so an empty ball is an error
    /// rather than a zero.
    #[error("ball B(x, {radius}) carries no mass")]
    ZeroMassBall { radius: f64 },

    #[error("total masses differ: {a} vs {b} (tolerance {tol})")]
    MassMismatch { a: f64, b: f64, tol: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A named generator constraint failed, e.g. a splitting gap that is too
    /// large for the level it is used at.
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
