use thiserror::Error;

/// Errors raised by the solver and the verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alpha = {0} is outside the admissible range {1}")]
    InvalidAlpha(f64, &'static str),
    #[error("grid resolution {ng} must be at least twice the truncation order {n}")]
    GridTooCoarse { n: usize, ng: usize },
    #[error("truncation order {0} is below the minimum of 4")]
    TruncationTooSmall(usize),
    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },
    #[error("unsupported derivative order {0} (only 1 and 2 are available)")]
    UnsupportedOrder(u32),
    #[error("kernel evaluated at coincident points x = y = ({0}, {1})")]
    CoincidentPoints(f64, f64),
    #[error("asymptotic kernel vanishes; relative error undefined")]
    ZeroAsymptote,
    #[error("empty quadrature region: {0}")]
    EmptyRegion(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("fit needs at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("nonpositive value {0} cannot be log-transformed")]
    NonPositive(f64),
    #[error("trajectory left the invariant quadrant at t = {time}: ({x1}, {x2})")]
    LeftQuadrant { time: f64, x1: f64, x2: f64 },
    #[error("snapshot format: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
