//! Execution-mode switch for the data-parallel inner loops.
//!
//! Every helper here returns results in input order, and reductions are
//! folded sequentially over those ordered results, so the parallel and the
//! sequential path produce bit-identical output.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    /// The mode actually used: without the `parallel` feature everything is sequential.
    pub fn effective(self) -> ExecMode {
        if cfg!(feature = "parallel") {
            self
        } else {
            ExecMode::Sequential
        }
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(mode: ExecMode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode.effective() {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<R, F>(mode: ExecMode, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match mode.effective() {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Maps `f` over fixed-size chunks of `items` and folds the per-chunk results
/// left to right with `fold`. Chunk boundaries do not depend on the mode.
pub fn chunked_reduce<T, R, F, G>(
    mode: ExecMode,
    items: &[T],
    chunk: usize,
    f: F,
    init: R,
    fold: G,
) -> R
where
    T: Sync,
    R: Send,
    F: Fn(&[T]) -> R + Sync + Send,
    G: FnMut(R, R) -> R,
{
    let chunk = chunk.max(1);
    let parts: Vec<R> = match mode.effective() {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            items.par_chunks(chunk).map(f).collect()
        }
        _ => items.chunks(chunk).map(f).collect(),
    };
    parts.into_iter().fold(init, fold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_on_float_reduction() {
        let xs: Vec<f64> = (0..10_000).map(|i| (i as f64).sin() * 1e-3).collect();
        let sum = |m| chunked_reduce(m, &xs, 97, |c| c.iter().sum::<f64>(), 0.0, |a, b| a + b);
        assert_eq!(
            sum(ExecMode::Sequential).to_bits(),
            sum(ExecMode::Parallel).to_bits()
        );
    }

    #[test]
    fn map_preserves_order() {
        let v = map_range(ExecMode::Parallel, 1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
        assert_eq!(map(ExecMode::Parallel, &[3, 1, 2], |x| x + 1), vec![4, 2, 3]);
    }
}
