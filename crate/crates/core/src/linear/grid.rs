use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{evaluate, train, LogRegHyper};
use crate::features::FeatureVector;
use crate::{par, Error, ExecMode, Label, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub lambda: f64,
    pub learning_rate: f64,
    pub mean_macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub points: Vec<GridPoint>,
    pub best: GridPoint,
}

/// k-fold cross-validated search over `lambdas × learning_rates`, scored by
/// mean macro-F1. Grid points are evaluated in parallel; ties keep the
/// earlier point.
pub fn grid_search(
    xs: &[FeatureVector],
    ys: &[Label],
    base: &LogRegHyper,
    lambdas: &[f64],
    learning_rates: &[f64],
    folds: usize,
    mode: ExecMode,
) -> Result<GridResult> {
    if folds < 2 || xs.len() < folds {
        return Err(Error::Config(format!("need at least {folds} samples and 2 folds")));
    }
    if lambdas.is_empty() || learning_rates.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(base.seed));
    let fold_of: Vec<usize> = {
        let mut f = vec![0; xs.len()];
        for (rank, &i) in order.iter().enumerate() {
            f[i] = rank % folds;
        }
        f
    };
    let grid: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| learning_rates.iter().map(move |&r| (l, r)))
        .collect();

    let scored: Vec<Result<GridPoint>> = par::map(mode, &grid, |&(lambda, learning_rate)| {
        let hyper = LogRegHyper { lambda, learning_rate, ..base.clone() };
        let mut total = 0.0;
        for k in 0..folds {
            let split = |held: bool| -> (Vec<FeatureVector>, Vec<Label>) {
                (0..xs.len())
                    .filter(|&i| (fold_of[i] == k) == held)
                    .map(|i| (xs[i].clone(), ys[i]))
                    .unzip()
            };
            let (tx, ty) = split(false);
            let (vx, vy) = split(true);
            let (m, _) = train(&tx, &ty, &hyper, ExecMode::Sequential)?;
            total += evaluate(&m, &vx, &vy, ExecMode::Sequential)?.macro_f1;
        }
        Ok(GridPoint { lambda, learning_rate, mean_macro_f1: total / folds as f64 })
    });
    let points = scored.into_iter().collect::<Result<Vec<_>>>()?;
    let best = points
        .iter()
        .copied()
        .reduce(|a, b| if b.mean_macro_f1 > a.mean_macro_f1 { b } else { a })
        .expect("non-empty grid");
    Ok(GridResult { points, best })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_a_point_and_scores_all() {
        let xs: Vec<FeatureVector> = (0..30)
            .map(|i| FeatureVector { sparse: vec![((i % 3) as u32, 1.0)], aux: vec![], aux_offset: 3 })
            .collect();
        let ys: Vec<Label> = (0..30).map(|i| Label::ALL[i % 3]).collect();
        let base = LogRegHyper { max_iter: 30, ..Default::default() };
        let r = grid_search(&xs, &ys, &base, &[1e-4, 1.0], &[0.1, 0.5], 5, ExecMode::Parallel).unwrap();
        assert_eq!(r.points.len(), 4);
        assert!(r.best.mean_macro_f1 >= r.points.iter().map(|p| p.mean_macro_f1).fold(0.0, f64::max) - 1e-12);
        assert!(grid_search(&xs, &ys, &base, &[], &[0.1], 5, ExecMode::Parallel).is_err());
    }
}
