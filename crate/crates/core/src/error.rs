use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported spatial dimension {0} (expected 1 or 2)")]
    Dimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("truncation mismatch: expected N = {expected}, found N = {found}")]
    TruncationMismatch { expected: usize, found: usize },

    #[error("collocation grid too small: G = {grid} must exceed N = {modes}")]
    GridTooSmall { grid: usize, modes: usize },

    #[error("grid shape {found:?} does not match expected {expected:?}")]
    GridShape {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid polynomial: leading coefficient c3 = {0} must be strictly positive")]
    LeadingCoefficient(f64),

    #[error("step size {h} is not aligned with the dyadic grid of the path (finest step {finest})")]
    MisalignedStep { h: f64, finest: f64 },

    #[error("level {level} out of range (finest level {finest})")]
    LevelOutOfRange { level: u32, finest: u32 },

    #[error("materialized path needs {needed} bytes, above the configured cap of {cap} bytes")]
    PathTooLarge { needed: u64, cap: u64 },

    #[error("fixed-point solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("solver failed at step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("trajectory {trajectory}: {source}")]
    Trajectory {
        trajectory: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("unsupported Lebesgue exponent p = {0}")]
    UnsupportedExponent(f64),

    #[error("empty sample")]
    EmptySample,

    #[error("degenerate regression input: {0}")]
    Degenerate(&'static str),

    #[error("spectrum file line {line}: {msg}")]
    SpectrumParse { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("failed to parse TOML configuration: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
