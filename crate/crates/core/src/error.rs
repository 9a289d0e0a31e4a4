use thiserror::Error;

/// Errors raised by the detection library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate at point {index}")]
    NonFinite { index: usize },

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("insufficient training data for threshold b: need {needed} points, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("degenerate radii; data has duplicates or insufficient spread")]
    DegenerateRadii,

    #[error("inconsistent regularity estimate (raw value {0})")]
    InconsistentRegularity(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing exact ball-mass oracle for {0}")]
    MissingOracle(String),

    #[error("sampler failure: {0}")]
    Sampler(String),

    #[error("sampler protocol error at line {line}: {message}")]
    Protocol { line: usize, message: String },

    #[error("malformed input at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Wraps the error with a description of what was being attempted.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error after peeling context layers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
