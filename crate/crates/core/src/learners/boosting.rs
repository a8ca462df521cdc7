//! Least-squares gradient boosting over regression trees.
//!
//! The model starts from the target mean; each stage fits a tree to the
//! current residuals and contributes with a constant shrinkage factor.
//! Because every leaf equals the residual mean of its node, each shrunk
//! stage cannot raise the training SSE for shrinkage in (0, 2).

use super::tree::{RegressionTree, FEATURE_DIM};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoost {
    pub base: f64,
    pub shrinkage: f64,
    pub trees: Vec<RegressionTree>,
    /// Training MSE after each stage (stage 0 = base model alone).
    pub stage_train_mse: Vec<f64>,
}

impl GradientBoost {
    pub fn fit(
        x: &[[f64; FEATURE_DIM]],
        y: &[f64],
        n_models: usize,
        shrinkage: f64,
        min_split: usize,
    ) -> GradientBoost {
        let n = x.len();
        let rows: Vec<usize> = (0..n).collect();
        let base = y.iter().sum::<f64>() / n as f64;
        let mut residuals: Vec<f64> = y.iter().map(|&t| t - base).collect();
        let mut stage_train_mse =
            vec![residuals.iter().map(|r| r * r).sum::<f64>() / n as f64];
        let mut trees = Vec::with_capacity(n_models);
        for _ in 0..n_models {
            let tree = RegressionTree::fit(x, &residuals, &rows, min_split);
            for (i, r) in residuals.iter_mut().enumerate() {
                *r -= shrinkage * tree.predict(&x[i]);
            }
            stage_train_mse.push(residuals.iter().map(|r| r * r).sum::<f64>() / n as f64);
            trees.push(tree);
        }
        GradientBoost {
            base,
            shrinkage,
            trees,
            stage_train_mse,
        }
    }

    pub fn predict(&self, x: &[f64; FEATURE_DIM]) -> f64 {
        self.base
            + self.shrinkage
                * self
                    .trees
                    .iter()
                    .map(|t| t.predict(x))
                    .sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(n: usize, seed: u64) -> (Vec<[f64; 10]>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<[f64; 10]> = (0..n).map(|_| std::array::from_fn(|_| rng.gen())).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|v| (0.4 * v[0] + 0.3 * v[5] * v[5] + 0.1 * rng.gen::<f64>()).clamp(0.0, 1.0))
            .collect();
        (x, y)
    }

    #[test]
    fn single_stage_unit_shrinkage_equals_plain_tree() {
        let (x, y) = random_data(120, 3);
        let rows: Vec<usize> = (0..x.len()).collect();
        let boost = GradientBoost::fit(&x, &y, 1, 1.0, 16);
        let tree = RegressionTree::fit(&x, &y, &rows, 16);
        for xi in &x {
            assert!(
                (boost.predict(xi) - tree.predict(xi)).abs() < 1e-9,
                "boosting with one unshrunk stage must degenerate to the base tree"
            );
        }
    }

    #[test]
    fn training_mse_non_increasing_across_stages() {
        for seed in [1u64, 2, 3] {
            let (x, y) = random_data(150, seed);
            let boost = GradientBoost::fit(&x, &y, 120, 0.05, 16);
            for w in boost.stage_train_mse.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "stage raised MSE: {} -> {}", w[0], w[1]);
            }
        }
    }
}
