//! Single-hidden-layer tanh networks trained by Levenberg-Marquardt on
//! the full-batch squared error.
//!
//! The feedforward variant maps input -> 20 tanh units -> linear output;
//! the cascade variant adds direct input-to-output connections. Networks
//! are tiny (at most 251 weights), so the normal equations are solved
//! directly: (J'J + mu I) dw = J'r, with mu scaled by ten on rejected
//! steps and down on accepted ones. Training stops after the epoch cap
//! or ten epochs without improvement on a seeded 15% validation split.

use super::tree::FEATURE_DIM;
use crate::error::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralModel {
    pub hidden: usize,
    pub cascade: bool,
    pub weights: Vec<f64>,
    pub epochs_run: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub patience: usize,
    pub val_fraction: f64,
    pub mu_init: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 200,
            patience: 10,
            val_fraction: 0.15,
            mu_init: 1e-3,
        }
    }
}

/// Network shape; all weight math takes the flat weight vector
/// explicitly so tests can probe losses and gradients at arbitrary
/// parameter settings.
#[derive(Debug, Clone, Copy)]
pub struct Topology {
    pub hidden: usize,
    pub cascade: bool,
}

impl Topology {
    pub fn weight_count(&self) -> usize {
        // W1 (hidden x in) + b1 + w2 + b2 [+ direct input weights]
        self.hidden * FEATURE_DIM
            + self.hidden
            + self.hidden
            + 1
            + if self.cascade { FEATURE_DIM } else { 0 }
    }

    /// Seeded init: uniform within +-1/sqrt(fan_in) per connection block.
    pub fn init_weights(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.weight_count());
        let in_scale = 1.0 / (FEATURE_DIM as f64).sqrt();
        for _ in 0..self.hidden * FEATURE_DIM + self.hidden {
            w.push(rng.gen_range(-in_scale..in_scale));
        }
        let hid_scale = 1.0 / (self.hidden as f64).sqrt();
        for _ in 0..self.hidden + 1 {
            w.push(rng.gen_range(-hid_scale..hid_scale));
        }
        if self.cascade {
            for _ in 0..FEATURE_DIM {
                w.push(rng.gen_range(-in_scale..in_scale));
            }
        }
        w
    }

    pub fn forward(&self, w: &[f64], x: &[f64; FEATURE_DIM]) -> f64 {
        let h = self.hidden;
        let (w1, rest) = w.split_at(h * FEATURE_DIM);
        let (b1, rest) = rest.split_at(h);
        let (w2, rest) = rest.split_at(h);
        let b2 = rest[0];
        let mut out = b2;
        for k in 0..h {
            let mut act = b1[k];
            for (j, xv) in x.iter().enumerate() {
                act += w1[k * FEATURE_DIM + j] * xv;
            }
            out += w2[k] * act.tanh();
        }
        if self.cascade {
            let direct = &rest[1..1 + FEATURE_DIM];
            for (j, xv) in x.iter().enumerate() {
                out += direct[j] * xv;
            }
        }
        out
    }

    /// Batch loss 0.5 * sum of squared residuals.
    pub fn loss(&self, w: &[f64], x: &[[f64; FEATURE_DIM]], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .map(|(xi, yi)| {
                let r = self.forward(w, xi) - yi;
                0.5 * r * r
            })
            .sum()
    }

    /// Analytic gradient of [`Topology::loss`]: J' r via per-sample
    /// backprop.
    pub fn gradient(&self, w: &[f64], x: &[[f64; FEATURE_DIM]], y: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; w.len()];
        let mut row = vec![0.0; w.len()];
        for (xi, yi) in x.iter().zip(y) {
            let r = self.forward(w, xi) - yi;
            self.jacobian_row(w, xi, &mut row);
            for (g, j) in grad.iter_mut().zip(&row) {
                *g += r * j;
            }
        }
        grad
    }

    /// d(output)/d(weight) for one sample, written into `row`.
    fn jacobian_row(&self, w: &[f64], x: &[f64; FEATURE_DIM], row: &mut [f64]) {
        let h = self.hidden;
        let (w1, rest) = w.split_at(h * FEATURE_DIM);
        let (b1, rest) = rest.split_at(h);
        let (w2, _) = rest.split_at(h);
        for k in 0..h {
            let mut act = b1[k];
            for (j, xv) in x.iter().enumerate() {
                act += w1[k * FEATURE_DIM + j] * xv;
            }
            let t = act.tanh();
            let dt = 1.0 - t * t;
            let scale = w2[k] * dt;
            for (j, xv) in x.iter().enumerate() {
                row[k * FEATURE_DIM + j] = scale * xv;
            }
            row[h * FEATURE_DIM + k] = scale; // b1
            row[h * FEATURE_DIM + h + k] = t; // w2
        }
        row[h * FEATURE_DIM + 2 * h] = 1.0; // b2
        if self.cascade {
            let base = h * FEATURE_DIM + 2 * h + 1;
            for (j, xv) in x.iter().enumerate() {
                row[base + j] = *xv;
            }
        }
    }
}

impl NeuralModel {
    pub fn fit(
        x: &[[f64; FEATURE_DIM]],
        y: &[f64],
        hidden: usize,
        cascade: bool,
        cfg: &TrainConfig,
        seed: u64,
    ) -> Result<NeuralModel> {
        let topo = Topology { hidden, cascade };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = x.len();

        // Seeded validation split for early stopping.
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let val_n = ((cfg.val_fraction * n as f64).floor() as usize).min(n.saturating_sub(2));
        let (val_idx, train_idx) = order.split_at(val_n);
        let tx: Vec<[f64; FEATURE_DIM]> = train_idx.iter().map(|&i| x[i]).collect();
        let ty: Vec<f64> = train_idx.iter().map(|&i| y[i]).collect();
        let vx: Vec<[f64; FEATURE_DIM]> = val_idx.iter().map(|&i| x[i]).collect();
        let vy: Vec<f64> = val_idx.iter().map(|&i| y[i]).collect();

        let mut w = topo.init_weights(&mut rng);
        let dim = w.len();
        let mut mu = cfg.mu_init;
        let mut train_loss = topo.loss(&w, &tx, &ty);
        let mut best_val = if vx.is_empty() {
            f64::INFINITY
        } else {
            topo.loss(&w, &vx, &vy)
        };
        let mut best_w = w.clone();
        let mut stale = 0usize;
        let mut epochs_run = 0usize;

        let mut jac = DMatrix::zeros(tx.len(), dim);
        let mut row = vec![0.0; dim];
        'epochs: for _ in 0..cfg.max_epochs {
            epochs_run += 1;
            let mut residuals = DVector::zeros(tx.len());
            for (i, xi) in tx.iter().enumerate() {
                residuals[i] = topo.forward(&w, xi) - ty[i];
                topo.jacobian_row(&w, xi, &mut row);
                for (c, v) in row.iter().enumerate() {
                    jac[(i, c)] = *v;
                }
            }
            let jtj = jac.transpose() * &jac;
            let jtr = jac.transpose() * &residuals;
            // Raise mu until a step reduces the training loss.
            loop {
                let mut damped = jtj.clone();
                for d in 0..dim {
                    damped[(d, d)] += mu;
                }
                let step = match Cholesky::new(damped) {
                    Some(chol) => chol.solve(&jtr),
                    None => {
                        mu *= 10.0;
                        if mu > 1e10 {
                            break 'epochs;
                        }
                        continue;
                    }
                };
                let candidate: Vec<f64> =
                    w.iter().zip(step.iter()).map(|(wv, s)| wv - s).collect();
                let cand_loss = topo.loss(&candidate, &tx, &ty);
                if cand_loss < train_loss {
                    w = candidate;
                    train_loss = cand_loss;
                    mu = (mu / 10.0).max(1e-15);
                    break;
                }
                mu *= 10.0;
                if mu > 1e10 {
                    break 'epochs;
                }
            }
            if !vx.is_empty() {
                let val_loss = topo.loss(&w, &vx, &vy);
                if val_loss < best_val {
                    best_val = val_loss;
                    best_w = w.clone();
                    stale = 0;
                } else {
                    stale += 1;
                    if stale >= cfg.patience {
                        break;
                    }
                }
            }
        }
        let final_w = if vx.is_empty() { w } else { best_w };
        if final_w.iter().any(|v| !v.is_finite()) {
            return Err(Error::training(
                if cascade { "cnn" } else { "fnn" },
                "weights diverged",
            ));
        }
        Ok(NeuralModel {
            hidden,
            cascade,
            weights: final_w,
            epochs_run,
        })
    }

    pub fn predict(&self, x: &[f64; FEATURE_DIM]) -> f64 {
        Topology {
            hidden: self.hidden,
            cascade: self.cascade,
        }
        .forward(&self.weights, x)
    }
}
