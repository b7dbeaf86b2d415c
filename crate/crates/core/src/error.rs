use thiserror::Error;

/// Errors produced by model construction, estimation and I/O.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MtdError {
    #[error("symbol index {index} is outside an alphabet of size {size}")]
    InvalidSymbol { index: usize, size: usize },

    #[error("unknown symbol {0:?}")]
    UnknownLabel(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("model too large: {entries} table entries exceed the limit of {limit}")]
    ModelTooLarge { entries: u128, limit: u128 },

    #[error("lag {lag} out of range 1..={max}")]
    LagOutOfRange { lag: usize, max: usize },

    #[error("corpus has no (m+1)-letter words")]
    EmptyCorpus,

    /// An observed word has zero probability under the current parameters.
    /// `trace` holds the log-likelihood values reached before the failure.
    #[error("observed word {word} has zero probability")]
    DegenerateLikelihood { word: String, trace: Vec<f64> },

    #[error("every restart failed: {}", .diagnostics.join("; "))]
    AllRestartsFailed { diagnostics: Vec<String> },

    #[error("reconstructed probability {value} for history {history}, next {next} lies outside [0, 1]")]
    NotAnMtdPoint {
        history: usize,
        next: usize,
        value: f64,
    },

    #[error("stationary distribution did not converge after {sweeps} sweeps (residual {residual:e})")]
    NonConvergentStationary { sweeps: usize, residual: f64 },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed model file: {0}")]
    Format(String),
}

impl From<std::io::Error> for MtdError {
    fn from(err: std::io::Error) -> Self {
        MtdError::Io(err.to_string())
    }
}

impl From<serde_json::Error> for MtdError {
    fn from(err: serde_json::Error) -> Self {
        MtdError::Format(err.to_string())
    }
}

pub type Result<T, E = MtdError> = std::result::Result<T, E>;
