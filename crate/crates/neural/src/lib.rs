//! CNN-BiLSTM hate-speech classifier on a small hand-differentiated tensor
//! engine, plus the layer-ablation harness.

pub mod ablation;
mod checkpoint;
pub mod config;
pub mod data;
pub mod error;
pub mod net;
pub mod tensor;
pub mod train;
pub mod vocab;

pub use config::{Activation, NetConfig, Optimizer, TrainHyper};
pub use error::{Error, Result};
pub use net::{Example, Network, StepCtx};
pub use tensor::Tensor;
pub use train::{evaluate, train, TrainReport};
pub use vocab::TokenIndex;
