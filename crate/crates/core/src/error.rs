use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed row: {reason}")]
    MalformedRow {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{path}:{line}: label {label:?} has no mapping for source {source_id}")]
    UnmappedLabel {
        path: PathBuf,
        line: usize,
        label: String,
        source_id: String,
    },
    #[error("missing column {column:?} in {path}")]
    MissingColumn { path: PathBuf, column: String },
    #[error("duplicate source id {0:?}")]
    DuplicateSource(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("unknown language tag {0:?}")]
    UnknownLanguage(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("lexicon not loaded: {0}")]
    LexiconMissing(&'static str),
    #[error("{path}:{line}: bad lexicon entry: {reason}")]
    Lexicon {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("training diverged: non-finite loss at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("invalid model file: {0}")]
    ModelFormat(String),
    #[error("invalid synthetic spec: {0}")]
    Synth(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
