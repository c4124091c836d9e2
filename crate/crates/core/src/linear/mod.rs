//! Multinomial logistic regression trained from scratch with mini-batch
//! gradient descent, plus evaluation metrics and a k-fold grid search.

mod grid;
mod io;
mod metrics;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use grid::{grid_search, GridPoint, GridResult};
pub use metrics::{render_table, ClassScores, Metrics};

use crate::features::FeatureVector;
use crate::{par, Error, ExecMode, Label, Language, Result};

const CLASSES: usize = Label::COUNT;
/// Samples per parallel work item when computing residuals and losses.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeighting {
    Equal,
    /// `n / (3 * n_c)`, zero for classes with no samples.
    InverseFrequency,
    Custom([f64; 3]),
}

impl ClassWeighting {
    pub fn resolve(&self, labels: &[Label]) -> [f64; 3] {
        match *self {
            ClassWeighting::Equal => [1.0; 3],
            ClassWeighting::Custom(w) => w,
            ClassWeighting::InverseFrequency => {
                let mut counts = [0usize; 3];
                for l in labels {
                    counts[l.index()] += 1;
                }
                let n = labels.len() as f64;
                counts.map(|c| if c == 0 { 0.0 } else { n / (3.0 * c as f64) })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegHyper {
    /// L2 strength on the weight matrix (the bias is not penalized).
    pub lambda: f64,
    pub class_weights: ClassWeighting,
    /// Maximum number of epochs.
    pub max_iter: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Convergence: `|Δloss| < tol` for `patience` consecutive epochs.
    pub tol: f64,
    pub patience: usize,
}

impl Default for LogRegHyper {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            class_weights: ClassWeighting::Equal,
            max_iter: 5000,
            learning_rate: 0.1,
            batch_size: 256,
            seed: 0,
            tol: 1e-6,
            patience: 5,
        }
    }
}

impl LogRegHyper {
    /// Iteration budget per language: 5000 for English, 3000 otherwise.
    pub fn for_language(language: Language) -> Self {
        Self {
            max_iter: match language {
                Language::En => 5000,
                Language::Hi | Language::HiCodemix => 3000,
            },
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.learning_rate > 0.0 && self.batch_size > 0) {
            return Err(Error::Config(format!("invalid hyperparameters {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub loss_per_epoch: Vec<f64>,
    pub converged: bool,
    pub epochs_run: usize,
    pub wall_clock_secs: f64,
}

/// Weight matrix rows follow the class order hate, abusive, neither.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    pub dim: usize,
    /// Row-major `3 × dim`.
    pub weights: Vec<f64>,
    pub bias: [f64; 3],
    pub hyper: LogRegHyper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: [f64; 3],
}

pub fn softmax(logits: [f64; 3]) -> [f64; 3] {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = logits.map(|z| (z - m).exp());
    let s: f64 = e.iter().sum();
    e.map(|v| v / s)
}

impl LogRegModel {
    pub fn zeros(dim: usize, hyper: LogRegHyper) -> Self {
        Self {
            dim,
            weights: vec![0.0; CLASSES * dim],
            bias: [0.0; 3],
            hyper,
        }
    }

    pub fn row(&self, class: usize) -> &[f64] {
        &self.weights[class * self.dim..(class + 1) * self.dim]
    }

    fn check_dim(&self, x: &FeatureVector) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: x.dim(),
            });
        }
        Ok(())
    }

    fn logits(&self, x: &FeatureVector) -> [f64; 3] {
        std::array::from_fn(|c| x.dot(self.row(c)) + self.bias[c])
    }

    pub fn predict_proba(&self, x: &FeatureVector) -> Result<[f64; 3]> {
        self.check_dim(x)?;
        Ok(softmax(self.logits(x)))
    }

    pub fn predict(&self, x: &FeatureVector) -> Result<Label> {
        Ok(Label::argmax(&self.predict_proba(x)?))
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Class-weighted mean cross-entropy plus `(λ/2)‖W‖²`.
    pub fn loss(&self, xs: &[FeatureVector], ys: &[Label], class_weights: [f64; 3], mode: ExecMode) -> f64 {
        let idx: Vec<usize> = (0..xs.len()).collect();
        let data = par::chunked_reduce(
            mode,
            &idx,
            CHUNK,
            |chunk| {
                chunk
                    .iter()
                    .map(|&i| {
                        let p = softmax(self.logits(&xs[i]));
                        -class_weights[ys[i].index()] * p[ys[i].index()].ln()
                    })
                    .sum::<f64>()
            },
            0.0,
            |a, b| a + b,
        );
        let reg = 0.5 * self.hyper.lambda * self.weights.iter().map(|w| w * w).sum::<f64>();
        data / xs.len().max(1) as f64 + reg
    }

    /// Analytic gradient of [`Self::loss`] over the given samples.
    pub fn gradient(&self, xs: &[FeatureVector], ys: &[Label], class_weights: [f64; 3], mode: ExecMode) -> Result<Gradient> {
        if xs.is_empty() {
            return Err(Error::Empty("gradient needs a non-empty batch"));
        }
        for x in xs {
            self.check_dim(x)?;
        }
        let idx: Vec<usize> = (0..xs.len()).collect();
        Ok(self.gradient_at(xs, ys, &idx, class_weights, mode))
    }

    fn gradient_at(&self, xs: &[FeatureVector], ys: &[Label], idx: &[usize], cw: [f64; 3], mode: ExecMode) -> Gradient {
        let n = idx.len() as f64;
        let residuals: Vec<[f64; 3]> = par::map(mode, idx, |&i| {
            let mut p = softmax(self.logits(&xs[i]));
            let y = ys[i].index();
            p[y] -= 1.0;
            let w = cw[y] / n;
            p.map(|v| v * w)
        });
        let mut g = Gradient {
            weights: self.weights.iter().map(|w| self.hyper.lambda * w).collect(),
            bias: [0.0; 3],
        };
        for (&i, r) in idx.iter().zip(&residuals) {
            for (b, rc) in g.bias.iter_mut().zip(r) {
                *b += rc;
            }
            let dim = self.dim;
            xs[i].for_each(|j, v| {
                for (c, rc) in r.iter().enumerate() {
                    g.weights[c * dim + j] += rc * v;
                }
            });
        }
        g
    }

    fn apply(&mut self, g: &Gradient, lr: f64) {
        for (w, d) in self.weights.iter_mut().zip(&g.weights) {
            *w -= lr * d;
        }
        for c in 0..CLASSES {
            self.bias[c] -= lr * g.bias[c];
        }
    }
}

/// Trains from zero weights. Each epoch shuffles with the seeded RNG, steps
/// through mini-batches, then records the full-data loss.
pub fn train(xs: &[FeatureVector], ys: &[Label], hyper: &LogRegHyper, mode: ExecMode) -> Result<(LogRegModel, TrainReport)> {
    if xs.is_empty() {
        return Err(Error::Empty("no training samples"));
    }
    if xs.len() != ys.len() {
        return Err(Error::Dimension {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    hyper.validate()?;
    let dim = xs[0].dim();
    if let Some(bad) = xs.iter().find(|x| x.dim() != dim) {
        return Err(Error::Dimension {
            expected: dim,
            got: bad.dim(),
        });
    }
    let start = Instant::now();
    let cw = hyper.class_weights.resolve(ys);
    let mut model = LogRegModel::zeros(dim, hyper.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut losses = Vec::new();
    let mut calm = 0;
    let mut converged = false;

    for epoch in 0..hyper.max_iter {
        order.shuffle(&mut rng);
        for batch in order.chunks(hyper.batch_size) {
            let g = model.gradient_at(xs, ys, batch, cw, mode);
            model.apply(&g, hyper.learning_rate);
        }
        let loss = model.loss(xs, ys, cw, mode);
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        if let Some(prev) = losses.last() {
            let delta: f64 = loss - prev;
            calm = if delta.abs() < hyper.tol { calm + 1 } else { 0 };
        }
        losses.push(loss);
        if calm >= hyper.patience {
            converged = true;
            break;
        }
    }
    let report = TrainReport {
        epochs_run: losses.len(),
        loss_per_epoch: losses,
        converged,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    };
    Ok((model, report))
}

pub fn evaluate(model: &LogRegModel, xs: &[FeatureVector], ys: &[Label], mode: ExecMode) -> Result<Metrics> {
    if xs.is_empty() {
        return Err(Error::Empty("evaluation set is empty"));
    }
    let preds: Vec<Result<Label>> = par::map(mode, xs, |x| model.predict(x));
    let preds = preds.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Metrics::from_predictions(ys, &preds))
}
