use std::path::PathBuf;

use hatewatch_core::{Label, Language};
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] hatewatch_core::Error),
    #[error(transparent)]
    Neural(#[from] hatewatch_neural::Error),
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: corrupt log entry: {reason}")]
    CorruptLog {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("invalid model bundle {path}: {reason}")]
    Bundle { path: PathBuf, reason: String },
    #[error("invalid registry manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },
    #[error("text is empty")]
    EmptyText,
    #[error("text has {chars} characters, limit is {limit}")]
    Oversize { chars: usize, limit: usize },
    #[error("no model loaded for language {0}")]
    NoModel(Language),
    #[error("unknown feedback id {0}")]
    UnknownId(u64),
    #[error("feedback {0} is already resolved")]
    AlreadyResolved(u64),
    #[error("a verdict must confirm or relabel")]
    EmptyVerdict,
    #[error("training pool for {language} has {have} resolved samples, at least {need} required")]
    PoolTooSmall {
        language: Language,
        have: usize,
        need: usize,
    },
    #[error("retrain aborted: class {label} makes up {share:.3} of the training set (limit {limit})")]
    BiasGuard { label: Label, share: f64, limit: f64 },
    #[error("a retrain for {0} is already running")]
    Busy(Language),
    #[error("invalid policy: {0}")]
    Policy(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn bundle(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Bundle {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
