use thiserror::Error;

/// Errors produced anywhere in the fitting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("sample too small: need at least {needed} points, got {got}")]
    SampleTooSmall { needed: usize, got: usize },

    #[error("coefficient of variation undefined: sample mean is zero")]
    UndefinedCv,

    #[error("fit failed for {family}/{method}: {diagnostics}")]
    FitFailed {
        family: String,
        method: String,
        diagnostics: String,
        warnings: Vec<String>,
    },

    #[error("cross-validation failed in fold {fold}: {source}")]
    CvFailed {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("measurement failed on run {run}: {message}")]
    Measurement { run: usize, message: String },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
