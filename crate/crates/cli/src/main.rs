//! `hatewatch`: corpus tooling, training, evaluation and the moderation server.

mod data;
mod model;
mod ops;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hatewatch_core::{ExecMode, LexiconSet};

#[derive(Debug, Parser)]
#[command(name = "hatewatch", version, about = "Multilingual hate-speech recognition toolkit")]
struct Cli {
    /// Lexicon directory; the bundled lexicons when omitted.
    #[arg(long, global = true, value_name = "DIR")]
    lexicons: Option<PathBuf>,
    /// Run data-parallel loops sequentially or on the thread pool.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Parallel)]
    mode: Mode,
    /// Log at debug level.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Sequential,
    Parallel,
}

impl From<Mode> for ExecMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Sequential => ExecMode::Sequential,
            Mode::Parallel => ExecMode::Parallel,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Collate source datasets into one unified-format corpus.
    Ingest(data::IngestArgs),
    /// Generate a synthetic labeled corpus.
    Synth(data::SynthArgs),
    /// Print the normalized token stream of each input line.
    Normalize(data::NormalizeArgs),
    /// Split hashtags into words.
    Segment(data::SegmentArgs),
    /// Train a classifier on a corpus and report held-out metrics.
    Train(model::TrainArgs),
    /// Score a corpus with a saved model bundle.
    Eval(model::EvalArgs),
    /// Train the CNN-BiLSTM layer-ablation variants and compare them.
    Ablate(model::AblateArgs),
    /// Run the moderation REST service.
    Serve(ops::ServeArgs),
    /// Measure single-comment scoring latency.
    Bench(ops::BenchArgs),
    /// Rewrite a feedback log with verdicts folded in.
    Compact(ops::CompactArgs),
}

pub struct Ctx {
    pub mode: ExecMode,
    pub lexicon_dir: Option<PathBuf>,
}

impl Ctx {
    pub fn lexicons(&self) -> anyhow::Result<LexiconSet> {
        Ok(match &self.lexicon_dir {
            Some(d) => LexiconSet::from_dir(d)?,
            None => LexiconSet::bundled(),
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_max_level(if cli.verbose { tracing::Level::DEBUG } else { tracing::Level::INFO })
        .with_writer(std::io::stderr)
        .init();
    let ctx = Ctx {
        mode: cli.mode.into(),
        lexicon_dir: cli.lexicons,
    };
    let result = match cli.command {
        Command::Ingest(a) => data::ingest(&ctx, a),
        Command::Synth(a) => data::synth(&ctx, a),
        Command::Normalize(a) => data::normalize(&ctx, a),
        Command::Segment(a) => data::segment(&ctx, a),
        Command::Train(a) => model::train(&ctx, a),
        Command::Eval(a) => model::eval(&ctx, a),
        Command::Ablate(a) => model::ablate(&ctx, a),
        Command::Serve(a) => ops::serve(&ctx, a),
        Command::Bench(a) => ops::bench(&ctx, a),
        Command::Compact(a) => ops::compact(&ctx, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
