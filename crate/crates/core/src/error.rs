use thiserror::Error;

/// Errors produced by ingestion, configuration and the numerical engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MfdfaError {
    /// Malformed or unusable input data.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A CSV row could not be used.
    #[error("{path}:{line}: {message}")]
    Csv {
        path: String,
        line: u64,
        message: String,
    },

    /// Inconsistent or out-of-range configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A box whose detrended fluctuation vanishes was hit with q <= 0.
    #[error("degenerate box: F2 = 0 at scale {scale}, box {index} (q = {q})")]
    DegenerateBox { scale: usize, index: usize, q: f64 },

    /// The input carries no variability at all.
    #[error("degenerate series (zero variance)")]
    ZeroVariance,

    /// Any other numerical breakdown (non-finite derivative, all points filtered, ...).
    #[error("numerical degeneracy: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl MfdfaError {
    /// Process exit code for the CLI: 1 input, 2 configuration, 3 numerical degeneracy.
    pub fn exit_code(&self) -> i32 {
        match self {
            MfdfaError::InvalidInput(_) | MfdfaError::Csv { .. } | MfdfaError::Io(_) => 1,
            MfdfaError::Config(_) => 2,
            MfdfaError::DegenerateBox { .. }
            | MfdfaError::ZeroVariance
            | MfdfaError::Numerical(_) => 3,
        }
    }
}

impl From<std::io::Error> for MfdfaError {
    fn from(e: std::io::Error) -> Self {
        MfdfaError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, MfdfaError>;
