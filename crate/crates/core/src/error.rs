use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported Kendall's tau {tau} for the {family} family")]
    UnsupportedTau { family: String, tau: f64 },
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("too few curves: need at least 3, got {0}")]
    TooFewCurves(usize),
    #[error("functional sets do not share grid and symmetry type")]
    GridMismatch,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag used on the CLI error stream.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::UnsupportedTau { .. } => "unsupported-tau",
            Error::NumericFailure(_) => "numeric-failure",
            Error::Degenerate(_) => "degenerate-column",
            Error::InvalidInput(_) => "invalid-input",
            Error::TooFewCurves(_) => "too-few-curves",
            Error::GridMismatch => "grid-mismatch",
            Error::InvalidConfig(_) => "invalid-config",
            Error::Io(_) => "io",
            Error::Csv(_) => "parse",
            Error::Json(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
