//! CNN-BiLSTM forward and backward passes.
//!
//! Data flow per sample: embedding → conv branches (conv, batchnorm, ReLU,
//! global max-pool) → m0 → fc0, and embedding → stacked BiLSTM → fc1; fc0 and
//! fc1 meet at m1, then dropout and fc2 give three class scores.
//!
//! Batchnorm couples the samples of a batch, so a batch runs in three
//! stages: a per-sample stage up to the conv outputs and through the whole
//! recurrent path, a batch-wide statistics stage, and a per-sample head.
//! Only the per-sample stages run in parallel. Gradients are summed over
//! fixed-size chunks in a fixed order, so both execution modes agree bit for
//! bit.

use hatewatch_core::{par, ExecMode, Label};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Activation, NetConfig};
use crate::tensor::{affine, affine_backward, matvec_acc, matvec_t_acc, outer_acc, sigmoid, Tensor};
use crate::{Error, Result};

pub const PAD: u32 = 0;
pub const BN_EPS: f64 = 1e-12;
const CHUNK: usize = 4;

/// A tokenized training example. `ids` may carry trailing padding.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub ids: Vec<u32>,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq)]
struct ConvSlots {
    k: usize,
    w: usize,
    b: usize,
    bn: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct DirSlots {
    wx: usize,
    wh: usize,
    b: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct LstmSlots {
    input: usize,
    dirs: [DirSlots; 2],
}

#[derive(Debug, Clone, PartialEq)]
struct Layout {
    embedding: usize,
    conv: Vec<ConvSlots>,
    fc0: Option<(usize, usize)>,
    lstm: Vec<LstmSlots>,
    fc1: Option<(usize, usize)>,
    fc2: (usize, usize),
}

/// Per-parameter gradient buffers, parallel to [`Network::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grads(pub Vec<Vec<f64>>);

impl Grads {
    fn zeros_like(params: &[Tensor]) -> Self {
        Grads(params.iter().map(|t| vec![0.0; t.len()]).collect())
    }

    fn add(mut self, other: Grads) -> Grads {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub(crate) config: NetConfig,
    pub(crate) params: Vec<Tensor>,
    pub(crate) names: Vec<String>,
    layout: Layout,
    /// Inference statistics per active conv branch.
    pub(crate) bn_mean: Vec<Vec<f64>>,
    pub(crate) bn_var: Vec<Vec<f64>>,
}

struct DirCache {
    /// Activated gates i, f, g, o per step.
    gates: Vec<f64>,
    c: Vec<f64>,
    h: Vec<f64>,
}

struct LayerCache {
    dirs: [DirCache; 2],
    out: Vec<f64>,
}

/// Everything that does not depend on batch statistics.
struct Front {
    ids: Vec<u32>,
    x: Vec<f64>,
    z: Vec<Vec<f64>>,
    layers: Vec<LayerCache>,
    rep: Vec<f64>,
    fc1_pre: Vec<f64>,
    fc1_out: Vec<f64>,
}

struct Head {
    xhat: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    argmax: Vec<Vec<usize>>,
    m0: Vec<f64>,
    fc0_pre: Vec<f64>,
    mask: Vec<f64>,
    m1d: Vec<f64>,
    logits: [f64; 3],
    loss: f64,
}

struct BnStats {
    mean: Vec<Vec<f64>>,
    var: Vec<Vec<f64>>,
    count: Vec<usize>,
}

struct Back1 {
    dx: Vec<f64>,
    dxhat: Vec<Vec<f64>>,
}

/// Widths and batchnorm outputs observed during one training-mode forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Inspection {
    pub concat_width: usize,
    pub lstm_output_width: usize,
    pub merge_width: usize,
    /// Per active branch, the conv outputs as rows of `filters`.
    pub conv_raw: Vec<Vec<Vec<f64>>>,
    /// Per active branch, the normalized conv outputs as rows of `filters`.
    pub bn_normalized: Vec<Vec<Vec<f64>>>,
}

/// Global max over positions of a `[positions, features]` block. Returns the
/// pooled values and, per feature, the first position holding the maximum.
pub fn global_max_pool(values: &[f64], features: usize) -> (Vec<f64>, Vec<usize>) {
    let positions = values.len() / features;
    let mut best = vec![f64::NEG_INFINITY; features];
    let mut at = vec![0; features];
    for p in 0..positions {
        for f in 0..features {
            let v = values[p * features + f];
            if v > best[f] {
                best[f] = v;
                at[f] = p;
            }
        }
    }
    (best, at)
}

fn glorot(rng: &mut ChaCha8Rng, t: &mut Tensor, fan_in: usize, fan_out: usize) {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    for v in t.values.iter_mut() {
        *v = rng.gen_range(-limit..limit);
    }
}

fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

/// Strips trailing padding; an all-padding sequence keeps one pad token.
fn effective(ids: &[u32]) -> Vec<u32> {
    let len = ids.iter().rposition(|&i| i != PAD).map_or(0, |p| p + 1);
    if len == 0 {
        vec![PAD]
    } else {
        ids[..len].to_vec()
    }
}

fn sample_loss(activation: Activation, logits: &[f64; 3], label: Label) -> f64 {
    let y = label.index();
    match activation {
        Activation::Softmax => {
            let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + logits.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
            lse - logits[y]
        }
        Activation::Sigmoid => logits
            .iter()
            .enumerate()
            .map(|(c, &z)| {
                let t = if c == y { 1.0 } else { 0.0 };
                z.max(0.0) - z * t + (-z.abs()).exp().ln_1p()
            })
            .sum(),
    }
}

fn scores(activation: Activation, logits: &[f64; 3]) -> [f64; 3] {
    match activation {
        Activation::Softmax => {
            let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let e = logits.map(|z| (z - m).exp());
            let s: f64 = e.iter().sum();
            e.map(|v| v / s)
        }
        Activation::Sigmoid => logits.map(sigmoid),
    }
}

/// Inverted-dropout mask keyed by seed, step and sample, so a mask never
/// depends on scheduling.
fn dropout_mask(rate: f64, seed: u64, step: u64, key: u64, width: usize) -> Vec<f64> {
    if rate == 0.0 {
        return vec![1.0; width];
    }
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&step.to_le_bytes());
    bytes[16..24].copy_from_slice(&key.to_le_bytes());
    bytes[24] = 0xd7;
    let mut rng = ChaCha8Rng::from_seed(bytes);
    let keep = 1.0 / (1.0 - rate);
    (0..width).map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep }).collect()
}

/// Training-mode pass settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCtx {
    /// Dropout masks are drawn per (seed, step, sample index).
    pub step: u64,
    pub dropout: bool,
    /// Multiplies the batch loss and therefore every gradient.
    pub loss_scale: f64,
}

impl Default for StepCtx {
    fn default() -> Self {
        Self { step: 0, dropout: true, loss_scale: 1.0 }
    }
}

impl Network {
    pub fn new(config: NetConfig) -> Result<Self> {
        config.validate()?;
        let (e, f, h, d) = (config.embed_dim, config.filters, config.hidden, config.dense);
        let mut params = Vec::new();
        let mut names = Vec::new();
        let mut add = |name: String, shape: &[usize]| {
            params.push(Tensor::zeros(shape));
            names.push(name);
            params.len() - 1
        };
        let embedding = add("embedding".into(), &[config.vocab_size, e]);
        let mut conv = Vec::new();
        for b in 0..3 {
            if !config.conv[b] {
                continue;
            }
            let k = config.kernel_sizes[b];
            let w = add(format!("c{}.conv.w", b + 1), &[f, k * e]);
            let bias = add(format!("c{}.conv.b", b + 1), &[f]);
            let bn = config.batchnorm.then(|| {
                (add(format!("c{}.bn.gamma", b + 1), &[f]), add(format!("c{}.bn.beta", b + 1), &[f]))
            });
            conv.push(ConvSlots { k, w, b: bias, bn });
        }
        let fc0 = config
            .has_conv()
            .then(|| (add("fc0.w".into(), &[d, config.concat_width()]), add("fc0.b".into(), &[d])));
        let mut lstm = Vec::new();
        let mut input = e;
        for l in 0..2 {
            if !config.lstm[l] {
                continue;
            }
            let dirs = ["fwd", "bwd"].map(|dir| DirSlots {
                wx: add(format!("bl{l}.{dir}.wx"), &[4 * h, input]),
                wh: add(format!("bl{l}.{dir}.wh"), &[4 * h, h]),
                b: add(format!("bl{l}.{dir}.b"), &[4 * h]),
            });
            lstm.push(LstmSlots { input, dirs });
            input = 2 * h;
        }
        let fc1 = config
            .has_lstm()
            .then(|| (add("fc1.w".into(), &[d, config.lstm_width()]), add("fc1.b".into(), &[d])));
        let fc2 = (add("fc2.w".into(), &[3, config.merge_width()]), add("fc2.b".into(), &[3]));
        let layout = Layout { embedding, conv, fc0, lstm, fc1, fc2 };

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        {
            let emb = &mut params[layout.embedding];
            for v in emb.values.iter_mut() {
                *v = rng.gen_range(-0.5..0.5);
            }
            emb.values[..e].iter_mut().for_each(|v| *v = 0.0);
        }
        for c in &layout.conv {
            glorot(&mut rng, &mut params[c.w], c.k * e, c.k * f);
            if let Some((g, _)) = c.bn {
                params[g].values.iter_mut().for_each(|v| *v = 1.0);
            }
        }
        if let Some((w, _)) = layout.fc0 {
            glorot(&mut rng, &mut params[w], config.concat_width(), d);
        }
        for l in &layout.lstm {
            for dir in l.dirs {
                glorot(&mut rng, &mut params[dir.wx], l.input, 4 * h);
                glorot(&mut rng, &mut params[dir.wh], h, 4 * h);
                params[dir.b].values[h..2 * h].iter_mut().for_each(|v| *v = 1.0);
            }
        }
        if let Some((w, _)) = layout.fc1 {
            glorot(&mut rng, &mut params[w], config.lstm_width(), d);
        }
        glorot(&mut rng, &mut params[layout.fc2.0], config.merge_width(), 3);

        let n_branches = layout.conv.len();
        Ok(Self {
            config,
            params,
            names,
            layout,
            bn_mean: vec![vec![0.0; f]; n_branches],
            bn_var: vec![vec![1.0; f]; n_branches],
        })
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn params(&self) -> &[Tensor] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor] {
        &mut self.params
    }

    pub fn param_names(&self) -> &[String] {
        &self.names
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    fn check_ids(&self, ids: &[u32]) -> Result<()> {
        match ids.iter().find(|&&i| i as usize >= self.config.vocab_size) {
            Some(&id) => Err(Error::IdOutOfRange { id, vocab: self.config.vocab_size }),
            None => Ok(()),
        }
    }

    fn p(&self, i: usize) -> &[f64] {
        &self.params[i].values
    }

    fn front(&self, raw: &[u32]) -> Front {
        let cfg = &self.config;
        let (e, f) = (cfg.embed_dim, cfg.filters);
        let ids = effective(raw);
        let len = ids.len();
        let emb = self.p(self.layout.embedding);
        let mut x = Vec::with_capacity(len * e);
        for &id in &ids {
            x.extend_from_slice(&emb[id as usize * e..(id as usize + 1) * e]);
        }

        let mut z = Vec::with_capacity(self.layout.conv.len());
        for c in &self.layout.conv {
            let positions = len.saturating_sub(c.k - 1).max(1);
            let mut out = vec![0.0; positions * f];
            let mut window = vec![0.0; c.k * e];
            for p in 0..positions {
                window.iter_mut().for_each(|v| *v = 0.0);
                let avail = (len - p).min(c.k);
                window[..avail * e].copy_from_slice(&x[p * e..(p + avail) * e]);
                affine(self.p(c.w), self.p(c.b), &window, &mut out[p * f..(p + 1) * f]);
            }
            z.push(out);
        }

        let mut layers: Vec<LayerCache> = Vec::with_capacity(self.layout.lstm.len());
        for l in &self.layout.lstm {
            let input = layers.last().map_or(&x[..], |prev| &prev.out[..]);
            let dirs = [
                self.lstm_dir(l.dirs[0], input, l.input, len, false),
                self.lstm_dir(l.dirs[1], input, l.input, len, true),
            ];
            let h = cfg.hidden;
            let mut out = vec![0.0; len * 2 * h];
            for t in 0..len {
                out[t * 2 * h..t * 2 * h + h].copy_from_slice(&dirs[0].h[t * h..(t + 1) * h]);
                out[t * 2 * h + h..(t + 1) * 2 * h].copy_from_slice(&dirs[1].h[t * h..(t + 1) * h]);
            }
            layers.push(LayerCache { dirs, out });
        }
        let (rep, fc1_pre, fc1_out) = match (layers.last(), self.layout.fc1) {
            (Some(top), Some((w, b))) => {
                let h = cfg.hidden;
                let mut rep = Vec::with_capacity(2 * h);
                rep.extend_from_slice(&top.dirs[0].h[(len - 1) * h..len * h]);
                rep.extend_from_slice(&top.dirs[1].h[..h]);
                assert_eq!(rep.len(), cfg.lstm_width());
                let mut pre = vec![0.0; cfg.dense];
                affine(self.p(w), self.p(b), &rep, &mut pre);
                let out = relu(&pre);
                (rep, pre, out)
            }
            _ => (Vec::new(), Vec::new(), Vec::new()),
        };
        Front { ids, x, z, layers, rep, fc1_pre, fc1_out }
    }

    fn lstm_dir(&self, s: DirSlots, u: &[f64], in_dim: usize, len: usize, reverse: bool) -> DirCache {
        let h = self.config.hidden;
        let (wx, wh, b) = (self.p(s.wx), self.p(s.wh), self.p(s.b));
        let mut gates = vec![0.0; len * 4 * h];
        let mut cs = vec![0.0; len * h];
        let mut hs = vec![0.0; len * h];
        let mut pre = vec![0.0; 4 * h];
        let mut h_prev = vec![0.0; h];
        let mut c_prev = vec![0.0; h];
        for step in 0..len {
            let t = if reverse { len - 1 - step } else { step };
            affine(wx, b, &u[t * in_dim..(t + 1) * in_dim], &mut pre);
            matvec_acc(wh, &h_prev, &mut pre);
            let g = &mut gates[t * 4 * h..(t + 1) * 4 * h];
            for j in 0..h {
                let i_g = sigmoid(pre[j]);
                let f_g = sigmoid(pre[h + j]);
                let c_g = pre[2 * h + j].tanh();
                let o_g = sigmoid(pre[3 * h + j]);
                g[j] = i_g;
                g[h + j] = f_g;
                g[2 * h + j] = c_g;
                g[3 * h + j] = o_g;
                let c = f_g * c_prev[j] + i_g * c_g;
                cs[t * h + j] = c;
                hs[t * h + j] = o_g * c.tanh();
            }
            h_prev.copy_from_slice(&hs[t * h..(t + 1) * h]);
            c_prev.copy_from_slice(&cs[t * h..(t + 1) * h]);
        }
        DirCache { gates, c: cs, h: hs }
    }

    fn batch_stats(&self, fronts: &[Front]) -> BnStats {
        let f = self.config.filters;
        let nb = self.layout.conv.len();
        let mut mean = vec![vec![0.0; f]; nb];
        let mut var = vec![vec![0.0; f]; nb];
        let mut count = vec![0usize; nb];
        for b in 0..nb {
            for fr in fronts {
                let z = &fr.z[b];
                count[b] += z.len() / f;
                for (i, v) in z.iter().enumerate() {
                    mean[b][i % f] += v;
                }
            }
            mean[b].iter_mut().for_each(|m| *m /= count[b] as f64);
            for fr in fronts {
                for (i, v) in fr.z[b].iter().enumerate() {
                    let dv = v - mean[b][i % f];
                    var[b][i % f] += dv * dv;
                }
            }
            var[b].iter_mut().for_each(|v| *v /= count[b] as f64);
        }
        BnStats { mean, var, count }
    }

    fn running_stats(&self) -> BnStats {
        BnStats { mean: self.bn_mean.clone(), var: self.bn_var.clone(), count: vec![0; self.bn_mean.len()] }
    }

    fn head(&self, fr: &Front, stats: &BnStats, mask: Vec<f64>, label: Option<Label>) -> Head {
        let cfg = &self.config;
        let f = cfg.filters;
        let mut xhat = Vec::new();
        let mut ys = Vec::new();
        let mut argmax = Vec::new();
        let mut m0 = Vec::with_capacity(cfg.concat_width());
        for (b, c) in self.layout.conv.iter().enumerate() {
            let z = &fr.z[b];
            let (xh, y) = match c.bn {
                Some((g, beta)) => {
                    let (g, beta) = (self.p(g), self.p(beta));
                    let xh: Vec<f64> = z
                        .iter()
                        .enumerate()
                        .map(|(i, v)| (v - stats.mean[b][i % f]) / (stats.var[b][i % f] + BN_EPS).sqrt())
                        .collect();
                    let y = xh.iter().enumerate().map(|(i, v)| g[i % f] * v + beta[i % f]).collect();
                    (xh, y)
                }
                None => (z.clone(), z.clone()),
            };
            let (pooled, at) = global_max_pool(&relu(&y), f);
            m0.extend_from_slice(&pooled);
            xhat.push(xh);
            ys.push(y);
            argmax.push(at);
        }
        let mut m1 = Vec::with_capacity(cfg.merge_width());
        let mut fc0_pre = Vec::new();
        if let Some((w, b)) = self.layout.fc0 {
            assert_eq!(m0.len(), cfg.concat_width());
            fc0_pre = vec![0.0; cfg.dense];
            affine(self.p(w), self.p(b), &m0, &mut fc0_pre);
            m1.extend(relu(&fc0_pre));
        }
        m1.extend_from_slice(&fr.fc1_out);
        let m1d: Vec<f64> = m1.iter().zip(&mask).map(|(a, m)| a * m).collect();
        let mut logits = [0.0; 3];
        affine(self.p(self.layout.fc2.0), self.p(self.layout.fc2.1), &m1d, &mut logits);
        let loss = label.map_or(0.0, |l| sample_loss(cfg.activation, &logits, l));
        Head { xhat, y: ys, argmax, m0, fc0_pre, mask, m1d, logits, loss }
    }

    /// Class scores for one sequence in inference mode.
    pub fn forward(&self, ids: &[u32]) -> Result<[f64; 3]> {
        self.check_ids(ids)?;
        let fr = self.front(ids);
        let h = self.head(&fr, &self.running_stats(), vec![1.0; self.config.merge_width()], None);
        Ok(scores(self.config.activation, &h.logits))
    }

    pub fn forward_batch(&self, batch: &[Vec<u32>], mode: ExecMode) -> Result<Vec<[f64; 3]>> {
        par::map(mode, batch, |ids| self.forward(ids)).into_iter().collect()
    }

    pub fn predict(&self, ids: &[u32]) -> Result<Label> {
        Ok(Label::argmax(&self.forward(ids)?))
    }

    fn train_forward(
        &self,
        examples: &[Example],
        indices: &[usize],
        ctx: StepCtx,
        mode: ExecMode,
    ) -> Result<(Vec<Front>, BnStats, Vec<Head>)> {
        if indices.is_empty() {
            return Err(Error::Empty("batch"));
        }
        for &i in indices {
            self.check_ids(&examples[i].ids)?;
        }
        let fronts = par::map(mode, indices, |&i| self.front(&examples[i].ids));
        let stats = self.batch_stats(&fronts);
        let rate = if ctx.dropout { self.config.dropout } else { 0.0 };
        let width = self.config.merge_width();
        let heads = par::map_range(mode, indices.len(), |j| {
            let i = indices[j];
            let mask = dropout_mask(rate, self.config.seed, ctx.step, i as u64, width);
            self.head(&fronts[j], &stats, mask, Some(examples[i].label))
        });
        Ok((fronts, stats, heads))
    }

    /// Training-mode batch loss: mean per-sample loss times `ctx.loss_scale`.
    pub fn loss(&self, examples: &[Example], indices: &[usize], ctx: StepCtx, mode: ExecMode) -> Result<f64> {
        let (_, _, heads) = self.train_forward(examples, indices, ctx, mode)?;
        Ok(ctx.loss_scale * heads.iter().map(|h| h.loss).sum::<f64>() / indices.len() as f64)
    }

    /// Runs a training-mode pass, stores the gradient of [`Self::loss`] in
    /// every parameter's `grad` buffer and returns the loss.
    pub fn backward(&mut self, examples: &[Example], indices: &[usize], ctx: StepCtx, mode: ExecMode) -> Result<f64> {
        let (loss, grads) = self.loss_and_grads(examples, indices, ctx, mode)?;
        for (t, g) in self.params.iter_mut().zip(grads.0) {
            t.grad = g;
        }
        Ok(loss)
    }

    pub fn loss_and_grads(&self, examples: &[Example], indices: &[usize], ctx: StepCtx, mode: ExecMode) -> Result<(f64, Grads)> {
        let (fronts, stats, heads) = self.train_forward(examples, indices, ctx, mode)?;
        let n = indices.len();
        let loss = ctx.loss_scale * heads.iter().map(|h| h.loss).sum::<f64>() / n as f64;
        let dscale = ctx.loss_scale / n as f64;
        let f = self.config.filters;
        let nb = self.layout.conv.len();

        let slots: Vec<usize> = (0..n).collect();
        let chunks: Vec<&[usize]> = slots.chunks(CHUNK).collect();

        // Stage 1: head and recurrent path, up to the batchnorm input.
        let stage1 = par::map(mode, &chunks, |chunk| {
            let mut g = Grads::zeros_like(&self.params);
            let mut s1 = vec![vec![0.0; f]; nb];
            let mut s2 = vec![vec![0.0; f]; nb];
            let mut backs = Vec::with_capacity(chunk.len());
            for &j in *chunk {
                let label = examples[indices[j]].label;
                let b = self.back_head(&fronts[j], &heads[j], label, dscale, &mut g);
                for (bi, dxh) in b.dxhat.iter().enumerate() {
                    for (q, d) in dxh.iter().enumerate() {
                        s1[bi][q % f] += d;
                        s2[bi][q % f] += d * heads[j].xhat[bi][q];
                    }
                }
                backs.push(b);
            }
            (g, s1, s2, backs)
        });
        let mut s1 = vec![vec![0.0; f]; nb];
        let mut s2 = vec![vec![0.0; f]; nb];
        let mut grads = Grads::zeros_like(&self.params);
        let mut backs = Vec::with_capacity(n);
        for (g, a, b, bk) in stage1 {
            grads = grads.add(g);
            for bi in 0..nb {
                for q in 0..f {
                    s1[bi][q] += a[bi][q];
                    s2[bi][q] += b[bi][q];
                }
            }
            backs.extend(bk);
        }

        // Stage 2: through batchnorm into the convolutions and embeddings.
        let stage2 = par::map(mode, &chunks, |chunk| {
            let mut g = Grads::zeros_like(&self.params);
            for &j in *chunk {
                self.back_conv(&fronts[j], &heads[j], &backs[j], &stats, &s1, &s2, &mut g);
            }
            g
        });
        for g in stage2 {
            grads = grads.add(g);
        }
        Ok((loss, grads))
    }

    fn back_head(&self, fr: &Front, hd: &Head, label: Label, dscale: f64, g: &mut Grads) -> Back1 {
        let cfg = &self.config;
        let (f, d) = (cfg.filters, cfg.dense);
        let y = label.index();
        let out = scores(cfg.activation, &hd.logits);
        let dlogits: Vec<f64> = (0..3)
            .map(|c| dscale * (out[c] - if c == y { 1.0 } else { 0.0 }))
            .collect();
        let (w2, b2) = self.layout.fc2;
        let mut dm1 = vec![0.0; hd.m1d.len()];
        {
            let (gw, gb) = two_mut(&mut g.0, w2, b2);
            affine_backward(self.p(w2), &hd.m1d, &dlogits, gw, gb, Some(&mut dm1));
        }
        dm1.iter_mut().zip(&hd.mask).for_each(|(v, m)| *v *= m);

        let mut dx = vec![0.0; fr.x.len()];
        let mut offset = 0;
        let mut dxhat = Vec::with_capacity(self.layout.conv.len());
        if let Some((w0, b0)) = self.layout.fc0 {
            let dpre: Vec<f64> = dm1[..d]
                .iter()
                .zip(&hd.fc0_pre)
                .map(|(g, p)| if *p > 0.0 { *g } else { 0.0 })
                .collect();
            offset = d;
            let mut dm0 = vec![0.0; hd.m0.len()];
            {
                let (gw, gb) = two_mut(&mut g.0, w0, b0);
                affine_backward(self.p(w0), &hd.m0, &dpre, gw, gb, Some(&mut dm0));
            }
            for (bi, c) in self.layout.conv.iter().enumerate() {
                let yv = &hd.y[bi];
                let mut dy = vec![0.0; yv.len()];
                for q in 0..f {
                    let p = hd.argmax[bi][q];
                    if yv[p * f + q] > 0.0 {
                        dy[p * f + q] = dm0[bi * f + q];
                    }
                }
                match c.bn {
                    Some((gi, bt)) => {
                        let gamma = self.p(gi);
                        for (i, dv) in dy.iter().enumerate() {
                            g.0[gi][i % f] += dv * hd.xhat[bi][i];
                            g.0[bt][i % f] += dv;
                        }
                        dxhat.push(dy.iter().enumerate().map(|(i, dv)| dv * gamma[i % f]).collect());
                    }
                    None => dxhat.push(dy),
                }
            }
        }
        if let Some((w1, b1)) = self.layout.fc1 {
            let dpre: Vec<f64> = dm1[offset..offset + d]
                .iter()
                .zip(&fr.fc1_pre)
                .map(|(g, p)| if *p > 0.0 { *g } else { 0.0 })
                .collect();
            let mut drep = vec![0.0; fr.rep.len()];
            {
                let (gw, gb) = two_mut(&mut g.0, w1, b1);
                affine_backward(self.p(w1), &fr.rep, &dpre, gw, gb, Some(&mut drep));
            }
            self.back_lstm(fr, &drep, g, &mut dx);
        }
        Back1 { dx, dxhat }
    }

    fn back_lstm(&self, fr: &Front, drep: &[f64], g: &mut Grads, dx: &mut [f64]) {
        let h = self.config.hidden;
        let len = fr.ids.len();
        let mut dout = vec![0.0; len * 2 * h];
        dout[(len - 1) * 2 * h..(len - 1) * 2 * h + h].copy_from_slice(&drep[..h]);
        dout[h..2 * h].copy_from_slice(&drep[h..]);
        for li in (0..self.layout.lstm.len()).rev() {
            let l = &self.layout.lstm[li];
            let input: &[f64] = if li == 0 { &fr.x } else { &fr.layers[li - 1].out };
            let mut din = vec![0.0; len * l.input];
            for (di, reverse) in [(0, false), (1, true)] {
                self.lstm_dir_back(l.dirs[di], &fr.layers[li].dirs[di], input, l.input, len, reverse, &dout, di * h, g, &mut din);
            }
            if li == 0 {
                dx.iter_mut().zip(&din).for_each(|(a, b)| *a += b);
            } else {
                dout = din;
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn lstm_dir_back(
        &self,
        s: DirSlots,
        cache: &DirCache,
        u: &[f64],
        in_dim: usize,
        len: usize,
        reverse: bool,
        dout: &[f64],
        col: usize,
        g: &mut Grads,
        du: &mut [f64],
    ) {
        let h = self.config.hidden;
        let (wx, wh) = (self.p(s.wx), self.p(s.wh));
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut dpre = vec![0.0; 4 * h];
        let zeros = vec![0.0; h];
        for step in (0..len).rev() {
            let t = if reverse { len - 1 - step } else { step };
            let prev = (step > 0).then(|| if reverse { t + 1 } else { t - 1 });
            let gates = &cache.gates[t * 4 * h..(t + 1) * 4 * h];
            let c_prev = prev.map_or(&zeros[..], |p| &cache.c[p * h..(p + 1) * h]);
            let h_prev = prev.map_or(&zeros[..], |p| &cache.h[p * h..(p + 1) * h]);
            for j in 0..h {
                let (i_g, f_g, c_g, o_g) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
                let dh = dout[t * 2 * h + col + j] + dh_next[j];
                let tc = cache.c[t * h + j].tanh();
                let d_o = dh * tc;
                let dc = dh * o_g * (1.0 - tc * tc) + dc_next[j];
                dc_next[j] = dc * f_g;
                dpre[j] = dc * c_g * i_g * (1.0 - i_g);
                dpre[h + j] = dc * c_prev[j] * f_g * (1.0 - f_g);
                dpre[2 * h + j] = dc * i_g * (1.0 - c_g * c_g);
                dpre[3 * h + j] = d_o * o_g * (1.0 - o_g);
            }
            outer_acc(&mut g.0[s.wx], &dpre, &u[t * in_dim..(t + 1) * in_dim]);
            outer_acc(&mut g.0[s.wh], &dpre, h_prev);
            g.0[s.b].iter_mut().zip(&dpre).for_each(|(a, b)| *a += b);
            matvec_t_acc(wx, &dpre, &mut du[t * in_dim..(t + 1) * in_dim]);
            dh_next.iter_mut().for_each(|v| *v = 0.0);
            matvec_t_acc(wh, &dpre, &mut dh_next);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn back_conv(&self, fr: &Front, hd: &Head, bk: &Back1, stats: &BnStats, s1: &[Vec<f64>], s2: &[Vec<f64>], g: &mut Grads) {
        let (e, f) = (self.config.embed_dim, self.config.filters);
        let len = fr.ids.len();
        let mut dx = bk.dx.clone();
        for (bi, c) in self.layout.conv.iter().enumerate() {
            let dz: Vec<f64> = match c.bn {
                Some(_) => {
                    let m = stats.count[bi] as f64;
                    bk.dxhat[bi]
                        .iter()
                        .enumerate()
                        .map(|(i, d)| {
                            let q = i % f;
                            (d - s1[bi][q] / m - hd.xhat[bi][i] * s2[bi][q] / m) / (stats.var[bi][q] + BN_EPS).sqrt()
                        })
                        .collect()
                }
                None => bk.dxhat[bi].clone(),
            };
            let positions = dz.len() / f;
            let mut window = vec![0.0; c.k * e];
            let mut dwin = vec![0.0; c.k * e];
            for p in 0..positions {
                let dzp = &dz[p * f..(p + 1) * f];
                if dzp.iter().all(|&v| v == 0.0) {
                    continue;
                }
                window.iter_mut().for_each(|v| *v = 0.0);
                let avail = (len - p).min(c.k);
                window[..avail * e].copy_from_slice(&fr.x[p * e..(p + avail) * e]);
                dwin.iter_mut().for_each(|v| *v = 0.0);
                {
                    let (gw, gb) = two_mut(&mut g.0, c.w, c.b);
                    affine_backward(self.p(c.w), &window, dzp, gw, gb, Some(&mut dwin));
                }
                for (a, b) in dx[p * e..(p + avail) * e].iter_mut().zip(&dwin) {
                    *a += b;
                }
            }
        }
        let ge = &mut g.0[self.layout.embedding];
        for (t, &id) in fr.ids.iter().enumerate() {
            if id == PAD {
                continue;
            }
            let row = &mut ge[id as usize * e..(id as usize + 1) * e];
            row.iter_mut().zip(&dx[t * e..(t + 1) * e]).for_each(|(a, b)| *a += b);
        }
    }

    /// Replaces the inference batchnorm statistics with exact statistics
    /// over `examples`.
    pub fn calibrate(&mut self, examples: &[Example], mode: ExecMode) -> Result<()> {
        if self.layout.conv.is_empty() || !self.config.batchnorm {
            return Ok(());
        }
        if examples.is_empty() {
            return Err(Error::Empty("calibration set"));
        }
        for ex in examples {
            self.check_ids(&ex.ids)?;
        }
        let fronts = par::map(mode, examples, |ex| self.front(&ex.ids));
        let stats = self.batch_stats(&fronts);
        self.bn_mean = stats.mean;
        self.bn_var = stats.var;
        Ok(())
    }

    /// Training-mode forward pass reporting layer widths and batchnorm output.
    pub fn inspect(&self, examples: &[Example], mode: ExecMode) -> Result<Inspection> {
        let indices: Vec<usize> = (0..examples.len()).collect();
        let ctx = StepCtx { dropout: false, ..StepCtx::default() };
        let (fronts, _, heads) = self.train_forward(examples, &indices, ctx, mode)?;
        let f = self.config.filters;
        let bn_normalized = (0..self.layout.conv.len())
            .map(|b| heads.iter().flat_map(|h| h.xhat[b].chunks(f).map(<[f64]>::to_vec)).collect())
            .collect();
        let conv_raw = (0..self.layout.conv.len())
            .map(|b| fronts.iter().flat_map(|fr| fr.z[b].chunks(f).map(<[f64]>::to_vec)).collect())
            .collect();
        Ok(Inspection {
            conv_raw,
            concat_width: heads[0].m0.len(),
            lstm_output_width: fronts[0].rep.len(),
            merge_width: heads[0].m1d.len(),
            bn_normalized,
        })
    }
}

/// Two distinct mutable gradient buffers.
fn two_mut(g: &mut [Vec<f64>], a: usize, b: usize) -> (&mut [f64], &mut [f64]) {
    assert!(a < b);
    let (lo, hi) = g.split_at_mut(b);
    (&mut lo[a], &mut hi[0])
}
