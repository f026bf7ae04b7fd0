use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("not converged: {what} (previous {previous}, current {current})")]
    Convergence {
        what: String,
        previous: f64,
        current: f64,
    },

    #[error("fixed-point iteration did not converge after {iterations} iterations; trace tail {trace:?}")]
    FixedPoint { iterations: usize, trace: Vec<f64> },

    #[error("convergence cap reached (dimension {dimension} > {cap}); trajectory {trajectory:?}")]
    ConvergenceCap {
        dimension: usize,
        cap: usize,
        trajectory: Vec<ConvergenceStep>,
    },

    #[error("singular denominator for levels ({n}, {m}): {value}")]
    SingularDenominator { n: usize, m: usize, value: f64 },

    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),

    #[error("embedding lost norm {leakage:e} beyond tolerance")]
    Cutoff { leakage: f64 },

    #[error("unsupported instantiation: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error at {path}: {message}")]
    Io { path: String, message: String },
}

/// One step of the convergence controller, kept for error reports.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConvergenceStep {
    pub nm: usize,
    pub nkeep: usize,
    pub nc: usize,
    pub value: f64,
    pub change: f64,
}

pub type Result<T> = std::result::Result<T, Error>;
