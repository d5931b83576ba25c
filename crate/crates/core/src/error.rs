use thiserror::Error;

/// Errors surfaced by every layer of the eigensolver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QaaeError {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("degenerate spectrum: {0}")]
    Degenerate(String),

    #[error("invalid size: {0}")]
    Size(String),

    #[error("normalization failed: {0}")]
    Normalization(String),

    /// Raised when an operation needs dense linear algebra that is out of
    /// reach at the requested size, or needs an artefact that was not built.
    #[error("capability: {0}")]
    Capability(String),

    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numeric integrity: {0}")]
    Numeric(String),

    #[error("measurement branch {k} has probability {p:e}")]
    ZeroBranch { k: u8, p: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("objective is NaN at theta = {theta:?}")]
    NanObjective { theta: Vec<f64> },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for QaaeError {
    fn from(e: std::io::Error) -> Self {
        QaaeError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, QaaeError>;
