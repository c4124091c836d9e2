use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use hatewatch_core::corpus::{load_corpus, split, SplitSpec, UnifiedRecord};
use hatewatch_core::linear::{render_table, LogRegHyper, Metrics};
use hatewatch_core::textnorm::{pipeline, NormConfig};
use hatewatch_core::{par, Label, Language, LexiconSet};
use hatewatch_hub::{train_classifier, Classifier, ModelKind, ModelRegistry, TrainOptions};
use hatewatch_neural::ablation::{ablate as run_ablation, standard_configs};
use hatewatch_neural::data::planted_dataset;
use hatewatch_neural::config::MAX_VOCAB;
use hatewatch_neural::{Example, NetConfig, TokenIndex, TrainHyper};
use serde::Serialize;

use crate::Ctx;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Linear,
    Neural,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Unified-format corpus (TSV).
    #[arg(long, value_name = "FILE")]
    corpus: PathBuf,
    #[arg(long)]
    language: Language,
    #[arg(long, value_enum, default_value_t = Kind::Linear)]
    kind: Kind,
    /// Share of each (language, label) stratum used for training.
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    /// Seed for the split.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// L2 strength for the linear model.
    #[arg(long)]
    lambda: Option<f64>,
    /// Leave out the profanity feature block.
    #[arg(long)]
    no_aux: bool,
    /// Neural training epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// Write the model bundle to this directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Install the model as the next version in this registry.
    #[arg(long, value_name = "DIR")]
    registry: Option<PathBuf>,
    /// Write held-out metrics as JSON.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct EvalReport<'a> {
    language: Language,
    kind: ModelKind,
    records: usize,
    metrics: &'a Metrics,
}

fn language_records(path: &Path, language: Language) -> Result<Vec<UnifiedRecord>> {
    let records: Vec<_> = load_corpus(path)?
        .into_iter()
        .filter(|r| r.language == language)
        .collect();
    if records.is_empty() {
        bail!("{} has no {language} records", path.display());
    }
    Ok(records)
}

fn score_all(ctx: &Ctx, model: &Classifier, records: &[UnifiedRecord], lx: &LexiconSet) -> Result<Metrics> {
    let predicted = par::map(ctx.mode, records, |r| model.score(&r.text, lx).map(|p| p.label))
        .into_iter()
        .collect::<Result<Vec<Label>, _>>()?;
    let actual: Vec<Label> = records.iter().map(|r| r.label).collect();
    Ok(Metrics::from_predictions(&actual, &predicted))
}

fn emit(
    language: Language, kind: ModelKind, n: usize, metrics: &Metrics, report: Option<&Path>, json: bool) -> Result<()> {
    let r = EvalReport {
        language,
        kind,
        records: n,
        metrics,
    };
    let text = serde_json::to_string_pretty(&r)?;
    if json {
        println!("{text}");
    } else {
        print!("{}", render_table("Dataset Type", &[(language.as_str().to_string(), metrics.clone())]));
    }
    if let Some(p) = report {
        fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

pub fn train(ctx: &Ctx, a: TrainArgs) -> Result<()> {
    let lx = ctx.lexicons()?;
    let records = language_records(&a.corpus, a.language)?;
    let (train_set, test_set) = split(
        &records,
        &SplitSpec {
            train_fraction: a.train_fraction,
            seed: a.seed,
        },
    );
    let mut opts = TrainOptions {
        kind: match a.kind {
            Kind::Linear => ModelKind::Linear,
            Kind::Neural => ModelKind::Neural,
        },
        with_aux: !a.no_aux,
        mode: ctx.mode,
        ..TrainOptions::default()
    };
    if let Some(lambda) = a.lambda {
        opts.linear = Some(LogRegHyper {
            lambda,
            ..LogRegHyper::for_language(a.language)
        });
    }
    if let Some(e) = a.epochs {
        opts.neural_hyper.epochs = e;
    }
    let samples: Vec<(String, Label)> = train_set.iter().map(|r| (r.text.clone(), r.label)).collect();
    let started = std::time::Instant::now();
    let model = train_classifier(a.language, &samples, &lx, &opts)?;
    eprintln!(
        "trained {} {} model on {} records in {:.2}s",
        a.language,
        model.kind().as_str(),
        samples.len(),
        started.elapsed().as_secs_f64()
    );
    if test_set.is_empty() {
        eprintln!("no held-out records; skipping evaluation");
    } else {
        let metrics = score_all(ctx, &model, &test_set, &lx)?;
        emit(a.language, model.kind(), test_set.len(), &metrics, a.report.as_deref(), false)?;
    }
    if let Some(dir) = &a.out {
        model.save(dir)?;
        eprintln!("saved bundle to {}", dir.display());
    }
    if let Some(root) = &a.registry {
        let version = ModelRegistry::open(root)?.install(model)?;
        eprintln!("installed {} v{version} in {}", a.language, root.display());
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Model bundle directory.
    #[arg(long, value_name = "DIR")]
    model: PathBuf,
    #[arg(long, value_name = "FILE")]
    corpus: PathBuf,
    /// Print the report as JSON instead of a table.
    #[arg(long)]
    json: bool,
    /// Also write the JSON report to this file.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
}

pub fn eval(ctx: &Ctx, a: EvalArgs) -> Result<()> {
    let lx = ctx.lexicons()?;
    let model = Classifier::load(&a.model)?;
    let records = language_records(&a.corpus, model.language())?;
    let metrics = score_all(ctx, &model, &records, &lx)?;
    emit(model.language(), model.kind(), records.len(), &metrics, a.report.as_deref(), a.json)
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// Corpus to ablate on; the planted-signal set when omitted.
    #[arg(long, value_name = "FILE", requires = "language")]
    corpus: Option<PathBuf>,
    #[arg(long)]
    language: Option<Language>,
    /// Size of the planted-signal set.
    #[arg(long, default_value_t = 64)]
    planted: usize,
    /// Vocabulary of the planted-signal set.
    #[arg(long, default_value_t = 100)]
    vocab: usize,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the report as JSON.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
}

pub fn ablate(ctx: &Ctx, a: AblateArgs) -> Result<()> {
    let hyper = TrainHyper {
        epochs: a.epochs,
        ..TrainHyper::default()
    };
    let (base, train_set, test_set) = match (&a.corpus, a.language) {
        (Some(path), Some(lang)) => {
            let lx = ctx.lexicons()?;
            let records = language_records(path, lang)?;
            let (tr, te) = split(&records, &SplitSpec { train_fraction: 0.8, seed: a.seed });
            let norm = NormConfig::new(lang);
            let docs = |rs: &[UnifiedRecord]| -> Vec<(Vec<String>, Label)> {
                rs.iter()
                    .map(|r| (pipeline(&r.text, &norm, &lx).into_iter().map(|t| t.surface).collect(), r.label))
                    .collect()
            };
            let (tr, te) = (docs(&tr), docs(&te));
            let token_docs: Vec<Vec<String>> = tr.iter().map(|(d, _)| d.clone()).collect();
            let index = TokenIndex::build(&token_docs, MAX_VOCAB)?;
            let encode = |set: &[(Vec<String>, Label)]| -> Vec<Example> {
                set.iter()
                    .map(|(d, l)| Example { ids: index.encode(d, norm.cap), label: *l })
                    .collect()
            };
            let base = NetConfig { seed: a.seed, ..NetConfig::with_vocab(index.len()) };
            (base, encode(&tr), encode(&te))
        }
        _ => {
            let data = planted_dataset(a.planted, a.vocab, a.seed);
            let base = NetConfig { seed: a.seed, ..NetConfig::with_vocab(a.vocab) };
            (base, data.clone(), data)
        }
    };
    let report = run_ablation(&standard_configs(&base), &hyper, &train_set, &test_set, ctx.mode)?;
    print!("{}", report.render());
    if let Some(p) = &a.report {
        fs::write(p, serde_json::to_string_pretty(&report)? + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}
