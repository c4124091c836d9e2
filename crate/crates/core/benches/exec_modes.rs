use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hatewatch_core::features::{featurize, VocabParams, Vocabulary};
use hatewatch_core::linear::{LogRegHyper, LogRegModel};
use hatewatch_core::synth::{generate_synthetic_corpus, SynthSpec};
use hatewatch_core::textnorm::{pipeline, NormConfig};
use hatewatch_core::{par, ExecMode, Label, Language, LexiconSet};

const MODES: [ExecMode; 2] = [ExecMode::Sequential, ExecMode::Parallel];

fn corpus() -> (Vec<String>, Vec<Label>) {
    let spec = SynthSpec::new(&[(Language::En, 4000)], [0.3, 0.3, 0.4], 7);
    let recs = generate_synthetic_corpus(&spec, &LexiconSet::bundled()).unwrap();
    (recs.iter().map(|r| r.text.clone()).collect(), recs.iter().map(|r| r.label).collect())
}

fn bench(c: &mut Criterion) {
    let lx = LexiconSet::bundled();
    let cfg = NormConfig::new(Language::En);
    let (texts, labels) = corpus();

    let mut g = c.benchmark_group("normalize");
    for mode in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &m| {
            b.iter(|| par::map(m, &texts, |t| pipeline(t, &cfg, &lx)))
        });
    }
    g.finish();

    let tokens = par::map(ExecMode::Parallel, &texts, |t| pipeline(t, &cfg, &lx));
    let docs: Vec<Vec<String>> = tokens.iter().map(|ts| ts.iter().map(|t| t.surface.clone()).collect()).collect();

    let mut g = c.benchmark_group("tfidf_fit");
    for mode in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &m| {
            b.iter(|| Vocabulary::fit(&docs, VocabParams::default(), m).unwrap())
        });
    }
    g.finish();

    let vocab = Vocabulary::fit(&docs, VocabParams::default(), ExecMode::Parallel).unwrap();
    let mut g = c.benchmark_group("tfidf_transform");
    for mode in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &m| {
            b.iter(|| vocab.transform_batch(&docs, m))
        });
    }
    g.finish();

    let xs: Vec<_> = tokens.iter().map(|ts| featurize(&vocab, ts, &lx, true)).collect();
    let model = LogRegModel::zeros(xs[0].dim(), LogRegHyper::default());
    let mut g = c.benchmark_group("logreg_gradient");
    for mode in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &m| {
            b.iter(|| model.gradient(&xs, &labels, [1.0; 3], m).unwrap())
        });
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench
}
criterion_main!(benches);
