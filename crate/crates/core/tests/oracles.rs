//! Independent oracles for TF-IDF weighting and the logistic-regression gradient.

use std::collections::{BTreeMap, BTreeSet};

use hatewatch_core::features::{FeatureVector, VocabParams, Vocabulary};
use hatewatch_core::linear::{LogRegHyper, LogRegModel};
use hatewatch_core::{ExecMode, Label};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unigram() -> VocabParams {
    VocabParams { ngram_min: 1, ngram_max: 1, ..VocabParams::default() }
}

/// Dense tf-idf by direct counting, keyed by term.
fn brute_force(docs: &[Vec<String>], doc: &[String]) -> BTreeMap<String, f64> {
    let n = docs.len() as f64;
    let mut tf: BTreeMap<String, f64> = BTreeMap::new();
    for t in doc {
        *tf.entry(t.clone()).or_default() += 1.0;
    }
    let mut out = BTreeMap::new();
    for (t, c) in tf {
        let df = docs.iter().filter(|d| d.contains(&t)).count() as f64;
        if df == 0.0 {
            continue;
        }
        out.insert(t, c * (((1.0 + n) / (1.0 + df)).ln() + 1.0));
    }
    let norm = out.values().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in out.values_mut() {
            *v /= norm;
        }
    }
    out
}

fn toy_corpus() -> impl Strategy<Value = Vec<Vec<String>>> {
    let token = (0u8..30).prop_map(|i| format!("t{i}"));
    proptest::collection::vec(proptest::collection::vec(token, 0..12), 1..=20)
}

fn by_term(vocab: &Vocabulary, v: &FeatureVector) -> BTreeMap<String, f64> {
    v.sparse
        .iter()
        .map(|&(i, w)| (vocab.entries()[i as usize].ngram.clone(), w))
        .collect()
}

#[test]
fn three_doc_example_matches_hand_counts() {
    let docs: Vec<Vec<String>> = ["a a b", "b c", "c"]
        .iter()
        .map(|d| d.split(' ').map(String::from).collect())
        .collect();
    let vocab = Vocabulary::fit(&docs, unigram(), ExecMode::Sequential).unwrap();
    let v = by_term(&vocab, &vocab.transform(&docs[0]));
    // a: tf 2, df 1; b: tf 1, df 2 (N = 3)
    let (a, b) = (2.0 * (2.0f64.ln() + 1.0), (4.0f64 / 3.0).ln() + 1.0);
    let n = (a * a + b * b).sqrt();
    assert!((v["a"] - a / n).abs() < 1e-12);
    assert!((v["b"] - b / n).abs() < 1e-12);
    assert_eq!(v.len(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn transform_matches_counting_oracle(docs in toy_corpus(), probe in proptest::collection::vec((0u8..35).prop_map(|i| format!("t{i}")), 0..10)) {
        let vocab = Vocabulary::fit(&docs, unigram(), ExecMode::Parallel).unwrap();
        for doc in docs.iter().chain(std::iter::once(&probe)) {
            let v = vocab.transform(doc);
            let got = by_term(&vocab, &v);
            let want = brute_force(&docs, doc);
            prop_assert_eq!(got.keys().collect::<Vec<_>>(), want.keys().collect::<Vec<_>>());
            for (t, w) in &want {
                prop_assert!((got[t] - w).abs() < 1e-12, "{t}: {} vs {w}", got[t]);
            }
            prop_assert!(v.sparse.windows(2).all(|p| p[0].0 < p[1].0));
            let norm = v.sparse_norm();
            prop_assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn modes_agree(docs in toy_corpus()) {
        let p = VocabParams::default();
        let a = Vocabulary::fit(&docs, p, ExecMode::Sequential).unwrap();
        let b = Vocabulary::fit(&docs, p, ExecMode::Parallel).unwrap();
        prop_assert_eq!(a.entries(), b.entries());
        prop_assert_eq!(a.transform_batch(&docs, ExecMode::Sequential), b.transform_batch(&docs, ExecMode::Parallel));
    }

    #[test]
    fn adding_a_document_never_raises_idf(docs in toy_corpus(), extra in proptest::collection::vec((0u8..30).prop_map(|i| format!("t{i}")), 1..8)) {
        let before = Vocabulary::fit(&docs, unigram(), ExecMode::Sequential).unwrap();
        let mut more = docs.clone();
        more.push(extra.clone());
        let after = Vocabulary::fit(&more, unigram(), ExecMode::Sequential).unwrap();
        let terms: BTreeSet<&String> = extra.iter().collect();
        for t in terms {
            if let Some((_, e)) = before.get(t) {
                prop_assert!(after.get(t).unwrap().1.idf <= e.idf + 1e-15);
            }
        }
    }
}

/// Loss written out independently: weighted mean cross-entropy plus L2 on weights.
fn oracle_loss(w: &[f64], b: &[f64; 3], dim: usize, xs: &[Vec<f64>], ys: &[Label], cw: [f64; 3], lambda: f64) -> f64 {
    let mut total = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let z: Vec<f64> = (0..3)
            .map(|c| b[c] + (0..dim).map(|j| w[c * dim + j] * x[j]).sum::<f64>())
            .collect();
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        total += cw[y.index()] * (lse - z[y.index()]);
    }
    total / xs.len() as f64 + 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>()
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let h = 1e-5;
    for trial in 0..20 {
        let dim = rng.gen_range(2..7);
        let n = rng.gen_range(1..12);
        let lambda = if trial % 4 == 0 { 0.0 } else { rng.gen_range(0.0..0.5) };
        let cw = [rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)];
        let dense: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let xs: Vec<FeatureVector> = dense
            .iter()
            .map(|x| FeatureVector {
                sparse: x.iter().enumerate().map(|(j, &v)| (j as u32, v)).collect(),
                aux: vec![],
                aux_offset: dim as u32,
            })
            .collect();
        let ys: Vec<Label> = (0..n).map(|_| Label::ALL[rng.gen_range(0..3)]).collect();
        let mut model = LogRegModel::zeros(dim, LogRegHyper { lambda, ..Default::default() });
        for w in model.weights.iter_mut() {
            *w = rng.gen_range(-2.0..2.0);
        }
        for b in model.bias.iter_mut() {
            *b = rng.gen_range(-1.0..1.0);
        }
        let g = model.gradient(&xs, &ys, cw, ExecMode::Parallel).unwrap();
        let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-8);
        for k in 0..model.weights.len() {
            let (mut wp, mut wm) = (model.weights.clone(), model.weights.clone());
            wp[k] += h;
            wm[k] -= h;
            let num = (oracle_loss(&wp, &model.bias, dim, &dense, &ys, cw, lambda)
                - oracle_loss(&wm, &model.bias, dim, &dense, &ys, cw, lambda))
                / (2.0 * h);
            assert!(rel(g.weights[k], num) < 1e-4, "trial {trial} w{k}: {} vs {num}", g.weights[k]);
        }
        for c in 0..3 {
            let (mut bp, mut bm) = (model.bias, model.bias);
            bp[c] += h;
            bm[c] -= h;
            let num = (oracle_loss(&model.weights, &bp, dim, &dense, &ys, cw, lambda)
                - oracle_loss(&model.weights, &bm, dim, &dense, &ys, cw, lambda))
                / (2.0 * h);
            assert!(rel(g.bias[c], num) < 1e-4, "trial {trial} b{c}: {} vs {num}", g.bias[c]);
        }
        let model_loss = model.loss(&xs, &ys, cw, ExecMode::Sequential);
        let oracle = oracle_loss(&model.weights, &model.bias, dim, &dense, &ys, cw, lambda);
        assert!((model_loss - oracle).abs() < 1e-10);
    }
}
