use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::Args;
use hatewatch_core::corpus::load_corpus;
use hatewatch_core::langid::RoutingThresholds;
use hatewatch_hub::{Classifier, FeedbackStore, Hub, HubSettings, ModelRegistry, RetrainPolicy};
use hatewatch_service::{bench, router, ServiceConfig};

use crate::Ctx;

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Service config (TOML). Falls back to $HATEWATCH_CONFIG, then defaults.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Listen address; overrides the config file and $HATEWATCH_LISTEN.
    #[arg(long, value_name = "ADDR")]
    listen: Option<String>,
}

pub fn serve(ctx: &Ctx, a: ServeArgs) -> Result<()> {
    let mut config = ServiceConfig::from_env(a.config.as_deref())?;
    if let Some(l) = a.listen {
        config.listen = l;
    }
    if config.lexicon_dir.is_none() {
        config.lexicon_dir = ctx.lexicon_dir.clone();
    }
    config.mode = ctx.mode;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(hatewatch_service::serve(config))?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Model bundle to serve.
    #[arg(long, value_name = "DIR", conflicts_with = "registry", required_unless_present = "registry")]
    model: Option<PathBuf>,
    /// Registry whose current models to serve.
    #[arg(long, value_name = "DIR")]
    registry: Option<PathBuf>,
    /// Corpus whose texts form the request set, in file order.
    #[arg(long, value_name = "FILE")]
    corpus: PathBuf,
    #[arg(long, default_value_t = 1000)]
    requests: usize,
    /// Concurrent in-flight requests.
    #[arg(long, default_value_t = 1)]
    concurrency: usize,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

pub fn bench(ctx: &Ctx, a: BenchArgs) -> Result<()> {
    if a.requests == 0 {
        bail!("--requests must be positive");
    }
    let scratch = tempfile::tempdir()?;
    let registry_dir = match (&a.model, &a.registry) {
        (Some(bundle), _) => {
            let dir = scratch.path().join("registry");
            let model = Classifier::load(bundle).with_context(|| format!("loading {}", bundle.display()))?;
            ModelRegistry::open(&dir)?.install(model)?;
            dir
        }
        (None, Some(r)) => r.clone(),
        (None, None) => unreachable!("clap requires one of --model or --registry"),
    };
    let mut hub = Hub::open(HubSettings {
        registry_dir,
        feedback_log: scratch.path().join("feedback.jsonl"),
        policy: RetrainPolicy::default(),
        routing: RoutingThresholds::default(),
        lexicons: Arc::new(ctx.lexicons()?),
    })?;
    hub.feedback_mut().set_durable(false);
    let texts: Vec<String> = load_corpus(&a.corpus)?
        .into_iter()
        .filter(|r| hub.registry().current(r.language).is_some())
        .map(|r| r.text)
        .collect();
    if texts.is_empty() {
        bail!("{} has no records in a language with a model", a.corpus.display());
    }
    let config = ServiceConfig {
        mode: ctx.mode,
        ..ServiceConfig::default()
    };
    let app = router(Arc::new(hub), &config);
    let rt = tokio::runtime::Runtime::new()?;
    let report = rt.block_on(bench::run(app, &texts, a.requests, a.concurrency))?;
    if report.failures > 0 {
        eprintln!("warning: {} requests failed", report.failures);
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.render());
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct CompactArgs {
    /// Feedback log (JSONL).
    #[arg(long, value_name = "FILE")]
    log: PathBuf,
}

pub fn compact(_ctx: &Ctx, a: CompactArgs) -> Result<()> {
    if !a.log.exists() {
        bail!("{} does not exist", a.log.display());
    }
    let store = FeedbackStore::open(&a.log, RetrainPolicy::default().threshold)?;
    let stats = store.compact()?;
    println!(
        "{}: {} lines -> {} records",
        a.log.display(),
        stats.lines_before,
        stats.lines_after
    );
    Ok(())
}
