use std::time::Instant;

use hatewatch_core::linear::Metrics;
use hatewatch_core::{ExecMode, Label};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{NetConfig, Optimizer, TrainHyper};
use crate::net::{Example, Network, StepCtx};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub loss_per_epoch: Vec<f64>,
    pub epochs_run: usize,
    pub wall_clock_secs: f64,
    pub train_accuracy: f64,
}

enum State {
    Sgd { momentum: f64, velocity: Vec<Vec<f64>> },
    Adam { m: Vec<Vec<f64>>, v: Vec<Vec<f64>>, t: i32 },
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl State {
    fn new(hyper: &TrainHyper, net: &Network) -> Self {
        let zeros = || net.params().iter().map(|t| vec![0.0; t.len()]).collect::<Vec<_>>();
        match hyper.optimizer {
            Optimizer::Sgd => State::Sgd { momentum: hyper.momentum, velocity: zeros() },
            Optimizer::Adam => State::Adam { m: zeros(), v: zeros(), t: 0 },
        }
    }

    fn step(&mut self, net: &mut Network, lr: f64) {
        match self {
            State::Sgd { momentum, velocity } => {
                for (p, vel) in net.params_mut().iter_mut().zip(velocity.iter_mut()) {
                    for ((w, g), v) in p.values.iter_mut().zip(&p.grad).zip(vel.iter_mut()) {
                        *v = *momentum * *v - lr * g;
                        *w += *v;
                    }
                }
            }
            State::Adam { m, v, t } => {
                *t += 1;
                let (c1, c2) = (1.0 - BETA1.powi(*t), 1.0 - BETA2.powi(*t));
                for ((p, ms), vs) in net.params_mut().iter_mut().zip(m.iter_mut()).zip(v.iter_mut()) {
                    for (((w, g), mi), vi) in p.values.iter_mut().zip(&p.grad).zip(ms.iter_mut()).zip(vs.iter_mut()) {
                        *mi = BETA1 * *mi + (1.0 - BETA1) * g;
                        *vi = BETA2 * *vi + (1.0 - BETA2) * g * g;
                        *w -= lr * (*mi / c1) / ((*vi / c2).sqrt() + ADAM_EPS);
                    }
                }
            }
        }
    }
}

fn epoch_rng(seed: u64, epoch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64 + 1);
    rng
}

/// Mini-batch training. `hyper.dropout` and `hyper.hidden` override the
/// config. Batchnorm inference statistics are set from the full training set
/// after the last epoch.
pub fn train(config: &NetConfig, hyper: &TrainHyper, data: &[Example], mode: ExecMode) -> Result<(Network, TrainReport)> {
    hyper.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let start = Instant::now();
    let mut net = Network::new(hyper.apply(config))?;
    let mut state = State::new(hyper, &net);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut loss_per_epoch = Vec::with_capacity(hyper.epochs);
    let mut step = 0u64;
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut epoch_rng(net.config().seed, epoch));
        let mut total = 0.0;
        for batch in order.chunks(hyper.batch_size) {
            let ctx = StepCtx { step, dropout: true, loss_scale: 1.0 };
            let loss = net.backward(data, batch, ctx, mode)?;
            if !loss.is_finite() || !net.params().iter().all(|t| t.grad.iter().all(|g| g.is_finite())) {
                return Err(Error::Diverged { epoch });
            }
            state.step(&mut net, hyper.learning_rate);
            total += loss * batch.len() as f64;
            step += 1;
        }
        loss_per_epoch.push(total / data.len() as f64);
    }
    if hyper.epochs > 0 {
        net.calibrate(data, mode)?;
    }
    let train_accuracy = evaluate(&net, data, mode)?.accuracy;
    Ok((
        net,
        TrainReport {
            loss_per_epoch,
            epochs_run: hyper.epochs,
            wall_clock_secs: start.elapsed().as_secs_f64(),
            train_accuracy,
        },
    ))
}

pub fn predict_all(net: &Network, data: &[Example], mode: ExecMode) -> Result<Vec<Label>> {
    let ids: Vec<Vec<u32>> = data.iter().map(|e| e.ids.clone()).collect();
    Ok(net.forward_batch(&ids, mode)?.iter().map(|s| Label::argmax(s)).collect())
}

pub fn evaluate(net: &Network, data: &[Example], mode: ExecMode) -> Result<Metrics> {
    if data.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let predicted = predict_all(net, data, mode)?;
    let actual: Vec<Label> = data.iter().map(|e| e.label).collect();
    Ok(Metrics::from_predictions(&actual, &predicted))
}
