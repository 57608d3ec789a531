//! Error type shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DoaError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("frequency {f} outside the unambiguous band [-{gamma}, {gamma}]")]
    Aliasing { f: f64, gamma: f64 },

    #[error("scene sampling failed: {0}")]
    SamplingFailure(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("structure violation: {0}")]
    StructureViolation(String),

    #[error("solver diverged: non-finite value at iteration {0}")]
    Divergence(usize),

    #[error("near-singular layer: |denominator| entry below {0:e}")]
    NearSingularLayer(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("loss undefined: {0}")]
    UndefinedLoss(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, DoaError>;
