//! Servable classifiers and their on-disk bundles.
//!
//! A bundle is a directory holding `bundle.toml` (kind, normalization and
//! feature settings) next to the model files of its kind:
//! `vocab.tsv` + `logreg.txt` for the linear model, `tokens.tsv` +
//! `network.ckpt` for the neural one.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use hatewatch_core::features::{featurize, VocabParams, Vocabulary};
use hatewatch_core::linear::{self, LogRegHyper, LogRegModel};
use hatewatch_core::textnorm::{pipeline, NormConfig};
use hatewatch_core::{ExecMode, Label, Language, LexiconSet};
use hatewatch_neural::{NetConfig, Network, TokenIndex, TrainHyper};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const META: &str = "bundle.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Linear,
    Neural,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Neural => "neural",
        }
    }
}

/// Class probabilities in class order plus the argmax label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub probs: [f64; 3],
}

impl Prediction {
    pub fn from_probs(probs: [f64; 3]) -> Self {
        Self {
            label: Label::argmax(&probs),
            probs,
        }
    }

    pub fn confidence(&self) -> f64 {
        self.probs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleMeta {
    kind: ModelKind,
    #[serde(default)]
    with_aux: bool,
    norm: NormConfig,
    vocab: Option<VocabParams>,
}

#[derive(Debug, Clone)]
pub struct LinearClassifier {
    pub norm: NormConfig,
    pub vocab: Vocabulary,
    pub model: LogRegModel,
    pub with_aux: bool,
}

#[derive(Debug, Clone)]
pub struct NeuralClassifier {
    pub norm: NormConfig,
    pub index: TokenIndex,
    pub net: Network,
}

#[derive(Debug, Clone)]
pub enum Classifier {
    Linear(LinearClassifier),
    Neural(NeuralClassifier),
}

impl Classifier {
    pub fn kind(&self) -> ModelKind {
        match self {
            Classifier::Linear(_) => ModelKind::Linear,
            Classifier::Neural(_) => ModelKind::Neural,
        }
    }

    pub fn language(&self) -> Language {
        self.norm().language
    }

    pub fn norm(&self) -> &NormConfig {
        match self {
            Classifier::Linear(c) => &c.norm,
            Classifier::Neural(c) => &c.norm,
        }
    }

    /// Normalizes `text` and scores it. Neural sigmoid outputs are rescaled
    /// to sum to one so both kinds report a probability triple.
    pub fn score(&self, text: &str, lexicons: &LexiconSet) -> Result<Prediction> {
        let tokens = pipeline(text, self.norm(), lexicons);
        let probs = match self {
            Classifier::Linear(c) => {
                let x = featurize(&c.vocab, &tokens, lexicons, c.with_aux);
                c.model.predict_proba(&x)?
            }
            Classifier::Neural(c) => {
                let surfaces: Vec<&str> = tokens.iter().map(|t| t.surface.as_str()).collect();
                let ids = c.index.encode(&surfaces, c.norm.cap.max(1));
                let s = c.net.forward(&ids)?;
                let total: f64 = s.iter().sum();
                if total > 0.0 {
                    s.map(|v| v / total)
                } else {
                    [1.0 / 3.0; 3]
                }
            }
        };
        Ok(Prediction::from_probs(probs))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let meta = match self {
            Classifier::Linear(c) => {
                write_with(&dir.join("vocab.tsv"), |w| c.vocab.write(w))?;
                write_with(&dir.join("logreg.txt"), |w| c.model.write(w))?;
                BundleMeta {
                    kind: ModelKind::Linear,
                    with_aux: c.with_aux,
                    norm: c.norm.clone(),
                    vocab: Some(*c.vocab.params()),
                }
            }
            Classifier::Neural(c) => {
                write_with(&dir.join("tokens.tsv"), |w| c.index.write(w))?;
                let p = dir.join("network.ckpt");
                let f = File::create(&p).map_err(|e| Error::io(&p, e))?;
                let mut w = BufWriter::new(f);
                c.net.write_checkpoint(&mut w)?;
                finish(w, &p)?;
                BundleMeta {
                    kind: ModelKind::Neural,
                    with_aux: false,
                    norm: c.norm.clone(),
                    vocab: None,
                }
            }
        };
        let text = toml::to_string(&meta).map_err(|e| Error::bundle(dir, e.to_string()))?;
        write_with(&dir.join(META), |w| w.write_all(text.as_bytes()))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let p = dir.join(META);
        let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        let meta: BundleMeta = toml::from_str(&text).map_err(|e| Error::bundle(dir, e.to_string()))?;
        match meta.kind {
            ModelKind::Linear => {
                let params = meta
                    .vocab
                    .ok_or_else(|| Error::bundle(dir, "linear bundle without [vocab] settings"))?;
                let vocab = Vocabulary::read(open(&dir.join("vocab.tsv"))?, params)?;
                let model = LogRegModel::read(open(&dir.join("logreg.txt"))?)?;
                let c = LinearClassifier {
                    norm: meta.norm,
                    vocab,
                    model,
                    with_aux: meta.with_aux,
                };
                let x = featurize(&c.vocab, &[], &LexiconSet::default(), c.with_aux);
                if x.dim() != c.model.dim {
                    return Err(Error::bundle(
                        dir,
                        format!("model dimension {} does not match features {}", c.model.dim, x.dim()),
                    ));
                }
                Ok(Classifier::Linear(c))
            }
            ModelKind::Neural => {
                let index = TokenIndex::read(open(&dir.join("tokens.tsv"))?)?;
                let net = Network::read_checkpoint(open(&dir.join("network.ckpt"))?)?;
                if net.config().vocab_size < index.len() {
                    return Err(Error::bundle(dir, "token index larger than the network vocabulary"));
                }
                Ok(Classifier::Neural(NeuralClassifier {
                    norm: meta.norm,
                    index,
                    net,
                }))
            }
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))?;
    w.get_ref().sync_all().map_err(|e| Error::io(path, e))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

/// Settings for training a fresh classifier from labeled text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainOptions {
    pub kind: ModelKind,
    pub vocab: VocabParams,
    pub with_aux: bool,
    /// Linear hyperparameters; `None` picks the per-language default.
    pub linear: Option<LogRegHyper>,
    pub neural: NetConfig,
    pub neural_hyper: TrainHyper,
    pub mode: ExecMode,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            kind: ModelKind::Linear,
            vocab: VocabParams::default(),
            with_aux: true,
            linear: None,
            neural: NetConfig::default(),
            neural_hyper: TrainHyper::default(),
            mode: ExecMode::default(),
        }
    }
}

/// Trains a classifier for `language` on `(text, label)` pairs.
pub fn train_classifier(
    language: Language,
    samples: &[(String, Label)],
    lexicons: &LexiconSet,
    opts: &TrainOptions,
) -> Result<Classifier> {
    if samples.is_empty() {
        return Err(hatewatch_core::Error::Empty("training samples").into());
    }
    let norm = NormConfig::new(language);
    let tokens: Vec<_> = hatewatch_core::par::map(opts.mode, samples, |(t, _)| pipeline(t, &norm, lexicons));
    let labels: Vec<Label> = samples.iter().map(|(_, l)| *l).collect();
    match opts.kind {
        ModelKind::Linear => {
            let docs: Vec<Vec<String>> = tokens
                .iter()
                .map(|ts| ts.iter().map(|t| t.surface.clone()).collect())
                .collect();
            let vocab = Vocabulary::fit(&docs, opts.vocab, opts.mode)?;
            let xs = hatewatch_core::par::map(opts.mode, &tokens, |ts| {
                featurize(&vocab, ts, lexicons, opts.with_aux)
            });
            let hyper = opts.linear.clone().unwrap_or_else(|| LogRegHyper::for_language(language));
            let (model, _) = linear::train(&xs, &labels, &hyper, opts.mode)?;
            Ok(Classifier::Linear(LinearClassifier {
                norm,
                vocab,
                model,
                with_aux: opts.with_aux,
            }))
        }
        ModelKind::Neural => {
            let docs: Vec<Vec<&str>> = tokens
                .iter()
                .map(|ts| ts.iter().map(|t| t.surface.as_str()).collect())
                .collect();
            let index = TokenIndex::build(&docs, opts.neural.vocab_size)?;
            let examples: Vec<hatewatch_neural::Example> = docs
                .iter()
                .zip(&labels)
                .map(|(d, &label)| hatewatch_neural::Example {
                    ids: index.encode(d, norm.cap.max(1)),
                    label,
                })
                .collect();
            let config = NetConfig {
                vocab_size: index.len().max(2),
                ..opts.neural.clone()
            };
            let (net, _) = hatewatch_neural::train(&config, &opts.neural_hyper, &examples, opts.mode)?;
            Ok(Classifier::Neural(NeuralClassifier { norm, index, net }))
        }
    }
}
