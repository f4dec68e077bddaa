//! Crate-wide error type.

/// Errors surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid entry law: {0}")]
    InvalidLaw(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite values encountered: {0}")]
    NonFinite(String),

    #[error("spectral argument must have nonzero imaginary part: {0}")]
    RealAxis(String),

    /// An Euler–Maruyama step crossed the ordering constraint and was refused.
    #[error("ordering violated after step; retry with dt ≤ {suggested_dt:e}")]
    StepRejected { suggested_dt: f64 },

    #[error("explicit step exceeds the stability bound: {0}")]
    Unstable(String),

    /// A hard invariant check failed (this falsifies the implementation).
    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
