use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("token id {id} out of range for vocabulary of {vocab}")]
    IdOutOfRange { id: u32, vocab: usize },
    #[error("invalid network config: {0}")]
    Config(String),
    #[error("invalid training hyperparameters: {0}")]
    Hyper(String),
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("tensor shape {shape:?} does not match {len} values")]
    Shape { shape: Vec<usize>, len: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
