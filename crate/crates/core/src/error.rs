use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate record id `{0}`")]
    DuplicateId(String),

    #[error("unknown label `{raw}` for source {source_name}; valid labels: {valid}")]
    UnknownLabel {
        source_name: String,
        raw: String,
        valid: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("label `{0}` has fewer records than there are splits")]
    StratumTooSmall(String),

    #[error("graph is empty")]
    EmptyGraph,

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        actual: usize,
    },

    #[error("invalid span ({start}, {end}) for {len} characters")]
    InvalidSpan {
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("training diverged at epoch {epoch}, batch {batch}: loss = {loss}")]
    Diverged {
        epoch: usize,
        batch: usize,
        loss: f64,
    },

    #[error("cultural provider failed for author `{author}`: {message}")]
    Provider { author: String, message: String },

    #[error("no records to evaluate")]
    EmptyEvaluation,

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable short name of the variant, for machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::DuplicateId(_) => "duplicate_id",
            Error::UnknownLabel { .. } => "unknown_label",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::StratumTooSmall(_) => "stratum_too_small",
            Error::EmptyGraph => "empty_graph",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidSpan { .. } => "invalid_span",
            Error::Diverged { .. } => "diverged",
            Error::Provider { .. } => "provider",
            Error::EmptyEvaluation => "empty_evaluation",
            Error::Checkpoint(_) => "checkpoint",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn dims(context: impl Into<String>, expected: usize, actual: usize) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected,
            actual,
        }
    }
}
