use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hatewatch_core::synth::{generate_synthetic_corpus, SynthSpec};
use hatewatch_core::{par, ExecMode, Label, Language, LexiconSet};
use hatewatch_hub::{train_classifier, TrainOptions};

fn corpus(lx: &LexiconSet) -> Vec<(String, Label)> {
    let spec = SynthSpec::new(&[(Language::En, 1500)], [0.4, 0.2, 0.4], 3);
    generate_synthetic_corpus(&spec, lx)
        .unwrap()
        .into_iter()
        .map(|r| (r.text, r.label))
        .collect()
}

fn modes(c: &mut Criterion) {
    let lx = LexiconSet::bundled();
    let data = corpus(&lx);

    let mut g = c.benchmark_group("retrain_linear");
    g.sample_size(10);
    for mode in [ExecMode::Sequential, ExecMode::Parallel] {
        let opts = TrainOptions { mode, ..TrainOptions::default() };
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &opts, |b, o| {
            b.iter(|| train_classifier(Language::En, &data, &lx, o).unwrap())
        });
    }
    g.finish();

    let model = train_classifier(Language::En, &data, &lx, &TrainOptions::default()).unwrap();
    let mut g = c.benchmark_group("score_batch");
    for mode in [ExecMode::Sequential, ExecMode::Parallel] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &m| {
            b.iter(|| par::map(m, &data, |(t, _)| model.score(t, &lx).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, modes);
criterion_main!(benches);
