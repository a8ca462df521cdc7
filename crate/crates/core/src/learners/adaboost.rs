//! Multiclass AdaBoost (SAMME) over a discretized quality index.
//!
//! Targets are rounded to a fixed class grid (k/K for K classes);
//! weighted classification trees act as weak learners. The predicted
//! quality is the value of the class winning the weighted vote.

use super::tree::FEATURE_DIM;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub n_classes: usize,
    pub stages: Vec<(ClassificationTree, f64)>,
}

/// Round a quality value to its class index on the k/K grid.
pub fn discretize(q: f64, n_classes: usize) -> usize {
    ((q * n_classes as f64).round() as usize).min(n_classes - 1)
}

impl AdaBoostModel {
    pub fn fit(
        x: &[[f64; FEATURE_DIM]],
        y: &[f64],
        n_models: usize,
        learning_rate: f64,
        n_classes: usize,
        min_split: usize,
    ) -> Result<AdaBoostModel> {
        let n = x.len();
        let k = n_classes as f64;
        let classes: Vec<usize> = y.iter().map(|&q| discretize(q, n_classes)).collect();
        let mut weights = vec![1.0 / n as f64; n];
        let mut stages: Vec<(ClassificationTree, f64)> = Vec::new();
        for _ in 0..n_models {
            let tree = ClassificationTree::fit(x, &classes, &weights, n_classes, min_split);
            let mut err = 0.0;
            let preds: Vec<usize> = x.iter().map(|xi| tree.predict(xi)).collect();
            for i in 0..n {
                if preds[i] != classes[i] {
                    err += weights[i];
                }
            }
            if err >= 1.0 - 1.0 / k {
                // SAMME condition: the learner is no better than chance.
                break;
            }
            if err < 1e-12 {
                // Perfect learner: give it a large finite say and stop.
                let alpha = learning_rate * (((1.0 - 1e-12) / 1e-12f64).ln() + (k - 1.0).ln());
                stages.push((tree, alpha));
                break;
            }
            let alpha = learning_rate * (((1.0 - err) / err).ln() + (k - 1.0).ln());
            for i in 0..n {
                if preds[i] != classes[i] {
                    weights[i] *= alpha.exp();
                }
            }
            let total: f64 = weights.iter().sum();
            if !(total.is_finite() && total > 0.0) {
                return Err(Error::training("edt-ab", "sample weights degenerated"));
            }
            for w in weights.iter_mut() {
                *w /= total;
            }
            stages.push((tree, alpha));
        }
        if stages.is_empty() {
            return Err(Error::training(
                "edt-ab",
                "first weak learner was no better than chance",
            ));
        }
        Ok(AdaBoostModel { n_classes, stages })
    }

    pub fn predict(&self, x: &[f64; FEATURE_DIM]) -> f64 {
        let mut votes = vec![0.0f64; self.n_classes];
        for (tree, alpha) in &self.stages {
            votes[tree.predict(x)] += alpha;
        }
        let mut best = 0usize;
        for (c, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = c;
            }
        }
        best as f64 / self.n_classes as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ClassNode {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Weight-aware classification tree; splits maximize the weighted Gini
/// gain, leaves predict the weighted majority class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationTree {
    nodes: Vec<ClassNode>,
}

impl ClassificationTree {
    pub fn fit(
        x: &[[f64; FEATURE_DIM]],
        classes: &[usize],
        weights: &[f64],
        n_classes: usize,
        min_split: usize,
    ) -> ClassificationTree {
        let mut nodes = Vec::new();
        let mut work: Vec<(usize, Vec<usize>)> = Vec::new();
        nodes.push(ClassNode::Leaf { class: 0 });
        work.push((0, (0..x.len()).collect()));
        while let Some((slot, rows)) = work.pop() {
            let majority = weighted_majority(classes, weights, &rows, n_classes);
            let split = if rows.len() >= min_split {
                best_gini_split(x, classes, weights, &rows, n_classes)
            } else {
                None
            };
            match split {
                None => nodes[slot] = ClassNode::Leaf { class: majority },
                Some((feature, threshold)) => {
                    let (mut lrows, mut rrows) = (Vec::new(), Vec::new());
                    for &i in &rows {
                        if x[i][feature] <= threshold {
                            lrows.push(i);
                        } else {
                            rrows.push(i);
                        }
                    }
                    let left = nodes.len();
                    nodes.push(ClassNode::Leaf { class: 0 });
                    let right = nodes.len();
                    nodes.push(ClassNode::Leaf { class: 0 });
                    nodes[slot] = ClassNode::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    };
                    work.push((left, lrows));
                    work.push((right, rrows));
                }
            }
        }
        ClassificationTree { nodes }
    }

    pub fn predict(&self, x: &[f64; FEATURE_DIM]) -> usize {
        let mut node = 0usize;
        loop {
            match &self.nodes[node] {
                ClassNode::Leaf { class } => return *class,
                ClassNode::Split {
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
}

fn weighted_majority(
    classes: &[usize],
    weights: &[f64],
    rows: &[usize],
    n_classes: usize,
) -> usize {
    let mut mass = vec![0.0f64; n_classes];
    for &i in rows {
        mass[classes[i]] += weights[i];
    }
    let mut best = 0usize;
    for (c, &m) in mass.iter().enumerate() {
        if m > mass[best] {
            best = c;
        }
    }
    best
}

/// Maximize sum(S_side / W_side) where S is the squared class-mass sum;
/// equivalent to minimizing the weighted Gini impurity of the children.
fn best_gini_split(
    x: &[[f64; FEATURE_DIM]],
    classes: &[usize],
    weights: &[f64],
    rows: &[usize],
    n_classes: usize,
) -> Option<(usize, f64)> {
    let total_w: f64 = rows.iter().map(|&i| weights[i]).sum();
    if total_w <= 0.0 {
        return None;
    }
    let mut total_mass = vec![0.0f64; n_classes];
    let mut total_s = 0.0f64;
    for &i in rows {
        let c = classes[i];
        total_s += weights[i] * (2.0 * total_mass[c] + weights[i]);
        total_mass[c] += weights[i];
    }
    let parent_score = total_s / total_w;
    let mut best: Option<(f64, usize, f64)> = None;
    let mut sorted: Vec<usize> = Vec::with_capacity(rows.len());
    let mut left_mass = vec![0.0f64; n_classes];
    for feature in 0..FEATURE_DIM {
        sorted.clear();
        sorted.extend_from_slice(rows);
        sorted.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));
        left_mass.iter_mut().for_each(|m| *m = 0.0);
        let mut left_w = 0.0f64;
        let mut left_s = 0.0f64;
        let mut right_s = total_s;
        let mut right_mass = total_mass.clone();
        for w in 0..sorted.len() - 1 {
            let i = sorted[w];
            let c = classes[i];
            let wi = weights[i];
            left_s += wi * (2.0 * left_mass[c] + wi);
            left_mass[c] += wi;
            right_mass[c] -= wi;
            right_s -= wi * (2.0 * right_mass[c] + wi);
            left_w += wi;
            let v = x[i][feature];
            let next = x[sorted[w + 1]][feature];
            if next <= v {
                continue;
            }
            let right_w = total_w - left_w;
            if left_w <= 0.0 || right_w <= 0.0 {
                continue;
            }
            let score = left_s / left_w + right_s / right_w;
            let gain = score - parent_score;
            if gain > best.map_or(1e-15, |(g, _, _)| g) {
                best = Some((gain, feature, 0.5 * (v + next)));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}
