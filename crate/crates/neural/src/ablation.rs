use hatewatch_core::linear::{render_table, Metrics};
use hatewatch_core::ExecMode;
use serde::Serialize;

use crate::config::{NetConfig, TrainHyper};
use crate::net::Example;
use crate::train::{evaluate, train};
use crate::{Error, Result};

pub const FULL: &str = "CNN-BiLSTM (all layers)";
pub const NO_CONV: &str = "Without C1 and C2 and C3";
pub const C1_ONLY: &str = "C1 only";
pub const C1_C2: &str = "C1 and C2";
pub const NO_LSTM: &str = "Without bl0 and bl1";
pub const BL0_ONLY: &str = "bl0 only";

/// The full network followed by the five layer-removal variants.
pub fn standard_configs(base: &NetConfig) -> Vec<(String, NetConfig)> {
    let with = |conv: [bool; 3], lstm: [bool; 2]| NetConfig { conv, lstm, ..base.clone() };
    vec![
        (FULL.into(), with([true; 3], [true; 2])),
        (NO_CONV.into(), with([false; 3], [true; 2])),
        (C1_ONLY.into(), with([true, false, false], [true; 2])),
        (C1_C2.into(), with([true, true, false], [true; 2])),
        (NO_LSTM.into(), with([true; 3], [false; 2])),
        (BL0_ONLY.into(), with([true; 3], [true, false])),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub name: String,
    pub metrics: Metrics,
    pub final_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    pub fn row(&self, name: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn render(&self) -> String {
        let rows: Vec<(String, Metrics)> = self.rows.iter().map(|r| (r.name.clone(), r.metrics.clone())).collect();
        render_table("Layer configuration", &rows)
    }
}

/// Trains every config on `train_set` with the same hyperparameters and
/// seed, and scores it on `test_set`.
pub fn ablate(
    configs: &[(String, NetConfig)],
    hyper: &TrainHyper,
    train_set: &[Example],
    test_set: &[Example],
    mode: ExecMode,
) -> Result<AblationReport> {
    if configs.len() < 2 {
        return Err(Error::Config("ablation needs at least two configurations".into()));
    }
    let mut rows = Vec::with_capacity(configs.len());
    for (name, cfg) in configs {
        let (net, report) = train(cfg, hyper, train_set, mode)?;
        rows.push(AblationRow {
            name: name.clone(),
            metrics: evaluate(&net, test_set, mode)?,
            final_loss: report.loss_per_epoch.last().copied(),
        });
    }
    Ok(AblationReport { rows })
}
