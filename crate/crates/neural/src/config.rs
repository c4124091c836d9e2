use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Softmax,
    Sigmoid,
}

/// Network structure. Conv branches are C1/C2/C3, recurrent layers bl0/bl1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub conv: [bool; 3],
    pub kernel_sizes: [usize; 3],
    pub filters: usize,
    pub batchnorm: bool,
    pub lstm: [bool; 2],
    pub hidden: usize,
    /// Width of the fc0 and fc1 dense layers.
    pub dense: usize,
    pub activation: Activation,
    pub dropout: f64,
    pub seed: u64,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            vocab_size: 4096,
            embed_dim: 32,
            conv: [true; 3],
            kernel_sizes: [3, 4, 5],
            filters: 64,
            batchnorm: true,
            lstm: [true; 2],
            hidden: 64,
            dense: 64,
            activation: Activation::Softmax,
            dropout: 0.2,
            seed: 42,
        }
    }
}

pub const MAX_VOCAB: usize = 4096;

impl NetConfig {
    pub fn with_vocab(vocab_size: usize) -> Self {
        Self { vocab_size, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !self.has_conv() && !self.has_lstm() {
            return bad("at least one conv branch or BiLSTM layer must be enabled");
        }
        if self.vocab_size < 2 || self.vocab_size > MAX_VOCAB {
            return bad("vocab_size must be in 2..=4096");
        }
        if self.embed_dim == 0 || self.filters == 0 || self.hidden == 0 || self.dense == 0 {
            return bad("embed_dim, filters, hidden and dense must be positive");
        }
        if self.kernel_sizes.contains(&0) {
            return bad("kernel sizes must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must be in [0, 1)");
        }
        Ok(())
    }

    pub fn has_conv(&self) -> bool {
        self.conv.iter().any(|&c| c)
    }

    pub fn has_lstm(&self) -> bool {
        self.lstm.iter().any(|&l| l)
    }

    pub fn active_kernels(&self) -> Vec<usize> {
        (0..3).filter(|&b| self.conv[b]).map(|b| self.kernel_sizes[b]).collect()
    }

    /// Width of the conv concatenation (m0).
    pub fn concat_width(&self) -> usize {
        self.conv.iter().filter(|&&c| c).count() * self.filters
    }

    /// Width of a BiLSTM output: both directions.
    pub fn lstm_width(&self) -> usize {
        2 * self.hidden
    }

    /// Width of the merge layer (m1): fc0 and fc1 outputs side by side.
    pub fn merge_width(&self) -> usize {
        self.dense * (self.has_conv() as usize + self.has_lstm() as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    #[default]
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainHyper {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    /// Overrides [`NetConfig::dropout`].
    pub dropout: f64,
    /// Overrides [`NetConfig::hidden`].
    pub hidden: usize,
    /// SGD momentum; 0 is plain gradient descent.
    pub momentum: f64,
}

impl Default for TrainHyper {
    /// English settings: 22 epochs, batch 30, SGD at 0.001, dropout 0.2, hidden 64.
    fn default() -> Self {
        Self {
            epochs: 22,
            batch_size: 30,
            optimizer: Optimizer::Sgd,
            learning_rate: 0.001,
            dropout: 0.2,
            hidden: 64,
            momentum: 0.0,
        }
    }
}

impl TrainHyper {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Hyper(m.to_string()));
        if self.batch_size == 0 || self.hidden == 0 {
            return bad("batch_size and hidden must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must be in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must be in [0, 1)");
        }
        Ok(())
    }

    /// The network config this hyperparameter set trains.
    pub fn apply(&self, config: &NetConfig) -> NetConfig {
        NetConfig { dropout: self.dropout, hidden: self.hidden, ..config.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_widths() {
        let c = NetConfig::default();
        assert_eq!(c.concat_width(), 192);
        assert_eq!(c.lstm_width(), 128);
        let two_off = NetConfig { conv: [true, false, false], ..c.clone() };
        assert_eq!(two_off.concat_width(), 64);
    }

    #[test]
    fn needs_some_path() {
        let c = NetConfig { conv: [false; 3], lstm: [false; 2], ..NetConfig::default() };
        assert!(c.validate().is_err());
        assert!(NetConfig::default().validate().is_ok());
    }

    #[test]
    fn english_defaults_parse_verbatim() {
        let h: TrainHyper = serde_json::from_str(
            r#"{"epochs":22,"batch_size":30,"optimizer":"sgd","learning_rate":0.001,"dropout":0.2,"hidden":64}"#,
        )
        .unwrap();
        assert_eq!(h, TrainHyper::default());
        h.validate().unwrap();
    }
}
