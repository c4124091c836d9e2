//! Finite-difference checks of the analytic gradients, grouped by layer type.

use std::collections::BTreeMap;

use hatewatch_core::{ExecMode, Label};
use hatewatch_neural::{Activation, Example, NetConfig, Network, StepCtx};

fn tiny(activation: Activation, dropout: f64) -> NetConfig {
    NetConfig {
        vocab_size: 12,
        embed_dim: 3,
        filters: 2,
        hidden: 3,
        dense: 4,
        activation,
        dropout,
        seed: 3,
        ..NetConfig::default()
    }
}

fn batch() -> Vec<Example> {
    vec![
        Example { ids: vec![3, 5, 1, 9, 2, 7, 0, 0], label: Label::Hate },
        Example { ids: vec![4, 11, 6, 8, 10, 0, 0, 0], label: Label::Neither },
    ]
}

fn layer_kind(name: &str) -> &'static str {
    if name == "embedding" {
        "embedding"
    } else if name.contains(".conv.") {
        "conv"
    } else if name.contains(".bn.") {
        "batchnorm"
    } else if name.starts_with("bl") {
        "bilstm"
    } else {
        "dense"
    }
}

fn rel(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

fn numeric(net: &mut Network, examples: &[Example], ctx: StepCtx, pi: usize, j: usize, h: f64) -> f64 {
    let idx = [0, 1];
    let orig = net.params()[pi].values[j];
    net.params_mut()[pi].values[j] = orig + h;
    let up = net.loss(examples, &idx, ctx, ExecMode::Sequential).unwrap();
    net.params_mut()[pi].values[j] = orig - h;
    let down = net.loss(examples, &idx, ctx, ExecMode::Sequential).unwrap();
    net.params_mut()[pi].values[j] = orig;
    (up - down) / (2.0 * h)
}

/// Worst relative error `|a - n| / max(|a|, |n|, 1e-6)` per layer kind at
/// step `h`, plus the coordinates above 1e-3.
fn check(cfg: NetConfig, ctx: StepCtx, h: f64) -> (BTreeMap<&'static str, f64>, Vec<(usize, usize)>) {
    let examples = batch();
    let mut net = Network::new(cfg).unwrap();
    let (_, grads) = net.loss_and_grads(&examples, &[0, 1], ctx, ExecMode::Sequential).unwrap();
    let names = net.param_names().to_vec();
    let mut worst: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut bad = Vec::new();
    for (pi, name) in names.iter().enumerate() {
        for j in 0..net.params()[pi].len() {
            let e = rel(grads.0[pi][j], numeric(&mut net, &examples, ctx, pi, j, h));
            if e >= 1e-3 {
                bad.push((pi, j));
            }
            let w = worst.entry(layer_kind(name)).or_insert(0.0);
            *w = w.max(e);
        }
    }
    (worst, bad)
}

#[test]
fn every_layer_matches_finite_differences() {
    for (act, dropout) in [(Activation::Softmax, 0.0), (Activation::Softmax, 0.3), (Activation::Sigmoid, 0.0)] {
        let ctx = StepCtx { step: 5, dropout: true, loss_scale: 1.0 };
        let (worst, _) = check(tiny(act, dropout), ctx, 1e-4);
        assert_eq!(worst.len(), 5, "{worst:?}");
        for (kind, err) in &worst {
            assert!(*err < 1e-3, "{act:?}/{dropout}: {kind} relative error {err:e}");
        }
    }
}

#[test]
fn without_batchnorm_too() {
    let cfg = NetConfig { batchnorm: false, lstm: [true, false], ..tiny(Activation::Softmax, 0.0) };
    let (worst, _) = check(cfg, StepCtx::default(), 1e-4);
    assert!(worst.values().all(|&e| e < 1e-3), "{worst:?}");
}

#[test]
fn doubling_the_loss_doubles_gradients() {
    let net = Network::new(tiny(Activation::Softmax, 0.2)).unwrap();
    let examples = batch();
    let one = StepCtx { loss_scale: 1.0, ..StepCtx::default() };
    let two = StepCtx { loss_scale: 2.0, ..StepCtx::default() };
    let (l1, g1) = net.loss_and_grads(&examples, &[0, 1], one, ExecMode::Parallel).unwrap();
    let (l2, g2) = net.loss_and_grads(&examples, &[0, 1], two, ExecMode::Parallel).unwrap();
    assert!((l2 - 2.0 * l1).abs() < 1e-12);
    for (a, b) in g1.0.iter().flatten().zip(g2.0.iter().flatten()) {
        assert!((b - 2.0 * a).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn unused_token_gets_no_embedding_gradient() {
    let net = Network::new(tiny(Activation::Softmax, 0.0)).unwrap();
    let e = net.config().embed_dim;
    let (_, g) = net.loss_and_grads(&batch(), &[0, 1], StepCtx::default(), ExecMode::Parallel).unwrap();
    let unused = 0u32; // padding, and no sample uses id 0 as a real token
    assert!(g.0[0][unused as usize * e..(unused as usize + 1) * e].iter().all(|&v| v == 0.0));
    let only_first = Example { ids: vec![3, 5], label: Label::Abusive };
    let (_, g) = net.loss_and_grads(&[only_first], &[0], StepCtx::default(), ExecMode::Parallel).unwrap();
    for id in 0..12 {
        let row = &g.0[0][id * e..(id + 1) * e];
        if id != 3 && id != 5 {
            assert!(row.iter().all(|&v| v == 0.0), "id {id}");
        }
    }
}

/// Random instances can place a ReLU or max-pool input within `h` of its
/// kink, where a central difference straddles two linear pieces. Such
/// coordinates must agree once the step is small enough to stay on one piece.
#[test]
fn many_seeds_agree_up_to_kink_crossings() {
    let ctx = StepCtx { step: 2, dropout: true, loss_scale: 1.0 };
    let mut clean = 0;
    for seed in 0..12u64 {
        let cfg = NetConfig { seed, ..tiny(Activation::Softmax, 0.3) };
        let (_, bad) = check(cfg.clone(), ctx, 1e-4);
        if bad.is_empty() {
            clean += 1;
            continue;
        }
        let mut net = Network::new(cfg).unwrap();
        let examples = batch();
        let (_, grads) = net.loss_and_grads(&examples, &[0, 1], ctx, ExecMode::Sequential).unwrap();
        for (pi, j) in bad {
            let n = numeric(&mut net, &examples, ctx, pi, j, 1e-6);
            assert!(rel(grads.0[pi][j], n) < 1e-3, "seed {seed} {}[{j}]", net.param_names()[pi]);
        }
    }
    assert!(clean >= 9, "only {clean} of 12 seeds were kink-free");
}
