use std::io::{self, BufRead, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use hatewatch_core::corpus::{self, collate, compute_stats, load_sources, save_corpus};
use hatewatch_core::synth::{generate_synthetic_corpus, SynthSpec};
use hatewatch_core::textnorm::{self, segment_hashtag, EntityToggles, MarkerToggles, NormConfig};
use hatewatch_core::Language;

use crate::Ctx;

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// TOML file with one [[source]] table per dataset.
    #[arg(long, value_name = "FILE")]
    sources: PathBuf,
    /// Output corpus (TSV).
    #[arg(long, short, value_name = "FILE")]
    out: PathBuf,
    /// Keep exact duplicate texts.
    #[arg(long)]
    keep_duplicates: bool,
    /// Print per-language statistics after writing.
    #[arg(long)]
    stats: bool,
}

pub fn ingest(ctx: &Ctx, a: IngestArgs) -> Result<()> {
    let sources = load_sources(&a.sources)?;
    let records = collate(&sources, !a.keep_duplicates)?;
    corpus::validate(&records)?;
    save_corpus(&a.out, &records)?;
    eprintln!("wrote {} records to {}", records.len(), a.out.display());
    if a.stats {
        print_stats(ctx, &records)?;
    }
    Ok(())
}

fn print_stats(ctx: &Ctx, records: &[corpus::UnifiedRecord]) -> Result<()> {
    let lx = ctx.lexicons()?;
    let stats = compute_stats(
        records,
        |text, lang| {
            textnorm::pipeline(text, &NormConfig::new(lang), &lx)
                .into_iter()
                .map(|t| t.surface)
                .collect()
        },
        ctx.mode,
    );
    print!("{}", stats.render());
    Ok(())
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// English records.
    #[arg(long, default_value_t = 0)]
    en: usize,
    /// Hindi (Devanagari) records.
    #[arg(long, default_value_t = 0)]
    hi: usize,
    /// Romanized code-mixed Hindi records.
    #[arg(long, default_value_t = 0)]
    codemix: usize,
    /// Class mixture hate,abusive,neither; must sum to 1.
    #[arg(long, value_delimiter = ',', default_values_t = [0.4, 0.2, 0.4])]
    mixture: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output corpus (TSV).
    #[arg(long, short, value_name = "FILE")]
    out: PathBuf,
    /// Print per-language statistics after writing.
    #[arg(long)]
    stats: bool,
}

pub fn synth(ctx: &Ctx, a: SynthArgs) -> Result<()> {
    let counts: Vec<(Language, usize)> = [(Language::En, a.en), (Language::Hi, a.hi), (Language::HiCodemix, a.codemix)]
        .into_iter()
        .filter(|(_, n)| *n > 0)
        .collect();
    if counts.is_empty() {
        bail!("ask for at least one record with --en, --hi or --codemix");
    }
    let mixture: [f64; 3] = a
        .mixture
        .as_slice()
        .try_into()
        .context("--mixture takes exactly three values")?;
    let spec = SynthSpec::new(&counts, mixture, a.seed);
    let records = generate_synthetic_corpus(&spec, &ctx.lexicons()?)?;
    corpus::validate(&records)?;
    save_corpus(&a.out, &records)?;
    eprintln!("wrote {} records to {}", records.len(), a.out.display());
    if a.stats {
        print_stats(ctx, &records)?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    /// Text to normalize; reads stdin line by line when omitted.
    text: Option<String>,
    #[arg(long, default_value = "en")]
    language: Language,
    /// Keep URLs, mentions, numbers and other entities verbatim.
    #[arg(long)]
    no_entities: bool,
    /// Skip the <allcaps>, <elongated> and similar annotations.
    #[arg(long)]
    no_markers: bool,
    /// Leave hashtags unsegmented.
    #[arg(long)]
    no_segment: bool,
    /// Maximum tokens per line.
    #[arg(long, default_value_t = textnorm::DEFAULT_CAP)]
    cap: usize,
    /// Emit one JSON token array per line.
    #[arg(long)]
    json: bool,
}

pub fn normalize(ctx: &Ctx, a: NormalizeArgs) -> Result<()> {
    let lx = ctx.lexicons()?;
    let mut cfg = NormConfig::new(a.language);
    if a.no_entities {
        cfg.entities = EntityToggles {
            url: false,
            email: false,
            user: false,
            money: false,
            percent: false,
            phone: false,
            time: false,
            date: false,
            number: false,
        };
    }
    if a.no_markers {
        cfg.markers = MarkerToggles {
            allcaps: false,
            elongated: false,
            repeated: false,
            emphasis: false,
            censored: false,
            hashtag: false,
        };
    }
    cfg.segment_hashtags = !a.no_segment;
    cfg.cap = a.cap;
    let mut out = io::stdout().lock();
    let mut emit = |line: &str| -> Result<()> {
        let toks: Vec<String> = textnorm::pipeline(line, &cfg, &lx).into_iter().map(|t| t.surface).collect();
        if a.json {
            writeln!(out, "{}", serde_json::to_string(&toks)?)?;
        } else {
            writeln!(out, "{}", toks.join(" "))?;
        }
        Ok(())
    };
    match &a.text {
        Some(t) => emit(t)?,
        None => {
            for line in io::stdin().lock().lines() {
                emit(&line?)?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Hashtags, with or without the leading '#'.
    #[arg(required = true)]
    tags: Vec<String>,
}

pub fn segment(ctx: &Ctx, a: SegmentArgs) -> Result<()> {
    let lx = ctx.lexicons()?;
    for tag in &a.tags {
        println!("{tag}\t{}", segment_hashtag(tag, &lx.unigrams).join(" "));
    }
    Ok(())
}
