//! Binary regression tree with variance-reduction splits.
//!
//! Thresholds sit at midpoints between consecutive distinct sorted
//! values; a node is split only when it holds at least `min_split`
//! samples and some split strictly reduces the summed squared error.
//! Leaves predict the node target mean.

use serde::{Deserialize, Serialize};

pub const FEATURE_DIM: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<TreeNode>,
}

impl RegressionTree {
    /// Fit on the rows selected by `indices`.
    pub fn fit(
        x: &[[f64; FEATURE_DIM]],
        y: &[f64],
        indices: &[usize],
        min_split: usize,
    ) -> RegressionTree {
        let mut nodes = Vec::new();
        let mut work: Vec<(usize, Vec<usize>)> = Vec::new();
        nodes.push(TreeNode::Leaf { value: 0.0 });
        work.push((0, indices.to_vec()));
        while let Some((slot, rows)) = work.pop() {
            let mean = rows.iter().map(|&i| y[i]).sum::<f64>() / rows.len() as f64;
            let split = if rows.len() >= min_split {
                best_split(x, y, &rows)
            } else {
                None
            };
            match split {
                None => nodes[slot] = TreeNode::Leaf { value: mean },
                Some((feature, threshold)) => {
                    let (mut left_rows, mut right_rows) = (Vec::new(), Vec::new());
                    for &i in &rows {
                        if x[i][feature] <= threshold {
                            left_rows.push(i);
                        } else {
                            right_rows.push(i);
                        }
                    }
                    debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());
                    let left = nodes.len();
                    nodes.push(TreeNode::Leaf { value: 0.0 });
                    let right = nodes.len();
                    nodes.push(TreeNode::Leaf { value: 0.0 });
                    nodes[slot] = TreeNode::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    };
                    work.push((left, left_rows));
                    work.push((right, right_rows));
                }
            }
        }
        RegressionTree { nodes }
    }

    pub fn predict(&self, x: &[f64; FEATURE_DIM]) -> f64 {
        let mut node = 0usize;
        loop {
            match &self.nodes[node] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn is_single_leaf(&self) -> bool {
        self.nodes.len() == 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Exhaustive variance-reduction search. Returns the (feature, midpoint
/// threshold) with the largest strictly positive SSE gain; ties keep the
/// first candidate in (feature, threshold) order.
fn best_split(
    x: &[[f64; FEATURE_DIM]],
    y: &[f64],
    rows: &[usize],
) -> Option<(usize, f64)> {
    let n = rows.len() as f64;
    let total_sum: f64 = rows.iter().map(|&i| y[i]).sum();
    let total_sum2: f64 = rows.iter().map(|&i| y[i] * y[i]).sum();
    let parent_sse = total_sum2 - total_sum * total_sum / n;
    let mut best: Option<(f64, usize, f64)> = None;
    let mut sorted: Vec<(f64, f64)> = Vec::with_capacity(rows.len());
    for feature in 0..FEATURE_DIM {
        sorted.clear();
        sorted.extend(rows.iter().map(|&i| (x[i][feature], y[i])));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_n = 0.0f64;
        let mut left_sum = 0.0f64;
        let mut left_sum2 = 0.0f64;
        for w in 0..sorted.len() - 1 {
            let (v, t) = sorted[w];
            left_n += 1.0;
            left_sum += t;
            left_sum2 += t * t;
            let next = sorted[w + 1].0;
            if next <= v {
                continue; // identical values cannot separate
            }
            let right_n = n - left_n;
            let left_sse = left_sum2 - left_sum * left_sum / left_n;
            let right_sum = total_sum - left_sum;
            let right_sse = (total_sum2 - left_sum2) - right_sum * right_sum / right_n;
            let gain = parent_sse - left_sse - right_sse;
            if gain > best.map_or(0.0, |(g, _, _)| g) {
                best = Some((gain, feature, 0.5 * (v + next)));
            }
        }
    }
    best.map(|(_, f, thr)| (f, thr))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(n: usize) -> Vec<usize> {
        (0..n).collect()
    }

    #[test]
    fn small_node_stays_single_leaf_with_target_mean() {
        // Below the split threshold the tree is one leaf predicting the mean.
        let x: Vec<[f64; 10]> = (0..12).map(|i| [i as f64 / 11.0; 10]).collect();
        let y: Vec<f64> = (0..12).map(|i| i as f64 / 11.0).collect();
        let tree = RegressionTree::fit(&x, &y, &rows(12), 16);
        assert!(tree.is_single_leaf());
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!((tree.predict(&x[0]) - mean).abs() < 1e-12);
    }

    #[test]
    fn splits_recover_a_step_function() {
        let n = 64;
        let x: Vec<[f64; 10]> = (0..n)
            .map(|i| {
                let mut v = [0.25; 10];
                v[3] = i as f64 / (n - 1) as f64;
                v
            })
            .collect();
        let y: Vec<f64> = x.iter().map(|v| if v[3] < 0.5 { 0.2 } else { 0.8 }).collect();
        let tree = RegressionTree::fit(&x, &y, &rows(n), 16);
        for (xi, yi) in x.iter().zip(&y) {
            assert!((tree.predict(xi) - yi).abs() < 1e-12);
        }
    }

    #[test]
    fn predictions_bounded_by_target_range() {
        let mut state = 9u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let n = 200;
        let x: Vec<[f64; 10]> = (0..n)
            .map(|_| std::array::from_fn(|_| next()))
            .collect();
        let y: Vec<f64> = (0..n).map(|_| next()).collect();
        let (lo, hi) = y.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
        let tree = RegressionTree::fit(&x, &y, &rows(n), 16);
        for xi in &x {
            let p = tree.predict(xi);
            assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
        }
    }
}
