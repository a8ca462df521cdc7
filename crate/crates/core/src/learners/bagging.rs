//! Bootstrap-aggregated regression trees; equal-weight vote (mean).

use super::tree::{RegressionTree, FEATURE_DIM};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggedTrees {
    pub trees: Vec<RegressionTree>,
}

impl BaggedTrees {
    /// `bootstrap = false` fits every tree on the full sample (test-only
    /// switch used to check the degeneracy to a single tree).
    pub fn fit(
        x: &[[f64; FEATURE_DIM]],
        y: &[f64],
        n_models: usize,
        min_split: usize,
        bootstrap: bool,
        seed: u64,
    ) -> BaggedTrees {
        let n = x.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let full: Vec<usize> = (0..n).collect();
        let trees = (0..n_models)
            .map(|_| {
                if bootstrap {
                    let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                    RegressionTree::fit(x, y, &sample, min_split)
                } else {
                    RegressionTree::fit(x, y, &full, min_split)
                }
            })
            .collect();
        BaggedTrees { trees }
    }

    pub fn predict(&self, x: &[f64; FEATURE_DIM]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}
