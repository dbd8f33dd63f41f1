use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Data that violates a type invariant (non-finite values, mismatched shapes).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A parameter outside its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible sampling rate {target}: the calibration block alone contributes {floor}")]
    InfeasibleRate { target: f64, floor: f64 },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("ingest error in {path}: {reason}")]
    Ingest { path: PathBuf, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("case {case_id} ({variant}) failed: {source}")]
    Case {
        case_id: usize,
        variant: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by the experiment description rather than by
    /// data or the environment.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
