use crate::{Error, Result};

/// Dense row-major tensor with a gradient buffer of the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
    pub grad: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Self { shape: shape.to_vec(), values: vec![0.0; n], grad: vec![0.0; n] }
    }

    pub fn from_values(shape: &[usize], values: Vec<f64>) -> Result<Self> {
        if shape.iter().product::<usize>() != values.len() {
            return Err(Error::Shape { shape: shape.to_vec(), len: values.len() });
        }
        let grad = vec![0.0; values.len()];
        Ok(Self { shape: shape.to_vec(), values, grad })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().chain(&self.grad).all(|v| v.is_finite())
    }

    pub fn zero_grad(&mut self) {
        self.grad.iter_mut().for_each(|g| *g = 0.0);
    }

    /// Columns of a matrix; the length of a vector.
    pub fn cols(&self) -> usize {
        *self.shape.last().unwrap_or(&1)
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.values[r * c..(r + 1) * c]
    }
}

/// `out = b + W x` for `W` of shape `[out, in]`.
pub(crate) fn affine(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64]) {
    let n_in = x.len();
    for (o, slot) in out.iter_mut().enumerate() {
        let row = &w[o * n_in..(o + 1) * n_in];
        *slot = b[o] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// `out += W x`.
pub(crate) fn matvec_acc(w: &[f64], x: &[f64], out: &mut [f64]) {
    let n_in = x.len();
    for (o, slot) in out.iter_mut().enumerate() {
        let row = &w[o * n_in..(o + 1) * n_in];
        *slot += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// `dW += d ⊗ x`.
pub(crate) fn outer_acc(dw: &mut [f64], d: &[f64], x: &[f64]) {
    let n_in = x.len();
    for (o, &g) in d.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        for (r, xv) in dw[o * n_in..(o + 1) * n_in].iter_mut().zip(x) {
            *r += g * xv;
        }
    }
}

/// `dx += Wᵀ d`.
pub(crate) fn matvec_t_acc(w: &[f64], d: &[f64], dx: &mut [f64]) {
    let n_in = dx.len();
    for (o, &g) in d.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        for (dv, wv) in dx.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
            *dv += g * wv;
        }
    }
}

/// Accumulates `dW += d ⊗ x`, `db += d` and, if given, `dx += Wᵀ d`.
pub(crate) fn affine_backward(w: &[f64], x: &[f64], d: &[f64], dw: &mut [f64], db: &mut [f64], dx: Option<&mut [f64]>) {
    outer_acc(dw, d, x);
    for (b, g) in db.iter_mut().zip(d) {
        *b += g;
    }
    if let Some(dx) = dx {
        matvec_t_acc(w, d, dx);
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
