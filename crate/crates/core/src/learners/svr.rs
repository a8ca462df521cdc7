//! Epsilon-insensitive support vector regression, RBF kernel, trained by
//! sequential minimal optimization with maximal-violating-pair selection.
//!
//! The dual is solved over 2n box-constrained variables (the alpha and
//! alpha-star halves); convergence is declared when the KKT violation
//! drops to the configured tolerance. The kernel width defaults to
//! `1 / (10 * mean input variance)` when not set explicitly.

use super::tree::FEATURE_DIM;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub support: Vec<[f64; FEATURE_DIM]>,
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    /// Final KKT violation (Gmax - Gmin) when the solver stopped.
    pub kkt_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SvrConfig {
    pub cost: f64,
    pub epsilon: f64,
    pub tolerance: f64,
    pub max_iters: usize,
    pub gamma: Option<f64>,
}

impl Default for SvrConfig {
    fn default() -> Self {
        SvrConfig {
            cost: 20.0,
            epsilon: 0.1,
            tolerance: 1e-3,
            max_iters: 100_000,
            gamma: None,
        }
    }
}

pub fn default_gamma(x: &[[f64; FEATURE_DIM]]) -> Result<f64> {
    let n = x.len() as f64;
    let mut total_var = 0.0;
    for k in 0..FEATURE_DIM {
        let mean = x.iter().map(|v| v[k]).sum::<f64>() / n;
        total_var += x.iter().map(|v| (v[k] - mean) * (v[k] - mean)).sum::<f64>() / n;
    }
    let mean_var = total_var / FEATURE_DIM as f64;
    if mean_var <= 0.0 {
        return Err(Error::training("svr", "all inputs identical, kernel width undefined"));
    }
    Ok(1.0 / (10.0 * mean_var))
}

impl SvrModel {
    pub fn fit(x: &[[f64; FEATURE_DIM]], y: &[f64], cfg: &SvrConfig) -> Result<SvrModel> {
        let n = x.len();
        let gamma = match cfg.gamma {
            Some(g) if g > 0.0 => g,
            Some(g) => return Err(Error::training("svr", format!("gamma {g} must be positive"))),
            None => default_gamma(x)?,
        };
        let c = cfg.cost;
        // Full kernel cache: n is a few hundred in every experiment here.
        let kernel = {
            let mut k = vec![0.0f64; n * n];
            for i in 0..n {
                for j in i..n {
                    let mut d2 = 0.0;
                    for t in 0..FEATURE_DIM {
                        let d = x[i][t] - x[j][t];
                        d2 += d * d;
                    }
                    let v = (-gamma * d2).exp();
                    k[i * n + j] = v;
                    k[j * n + i] = v;
                }
            }
            k
        };
        // Variables 0..n are the alpha half (u = +1), n..2n the alpha-star
        // half (u = -1). g is the gradient of the dual objective.
        let mut z = vec![0.0f64; 2 * n];
        let mut g = vec![0.0f64; 2 * n];
        for i in 0..n {
            g[i] = cfg.epsilon - y[i];
            g[n + i] = cfg.epsilon + y[i];
        }
        let u = |s: usize| if s < n { 1.0 } else { -1.0 };
        let point = |s: usize| if s < n { s } else { s - n };

        let mut iterations = 0usize;
        let mut residual;
        loop {
            // maximal violating pair over -u_s g_s
            let mut gmax = f64::NEG_INFINITY;
            let mut gmin = f64::INFINITY;
            let mut i_sel = usize::MAX;
            let mut j_sel = usize::MAX;
            for s in 0..2 * n {
                let val = -u(s) * g[s];
                let in_up = if s < n { z[s] < c } else { z[s] > 0.0 };
                let in_low = if s < n { z[s] > 0.0 } else { z[s] < c };
                if in_up && val > gmax {
                    gmax = val;
                    i_sel = s;
                }
                if in_low && val < gmin {
                    gmin = val;
                    j_sel = s;
                }
            }
            residual = gmax - gmin;
            if !(residual > cfg.tolerance) || i_sel == usize::MAX || j_sel == usize::MAX {
                break;
            }
            if iterations >= cfg.max_iters {
                break;
            }
            iterations += 1;

            let (pi, pj) = (point(i_sel), point(j_sel));
            let eta = (kernel[pi * n + pi] + kernel[pj * n + pj] - 2.0 * kernel[pi * n + pj])
                .max(1e-12);
            let mut t = residual / eta;
            // box clips along the feasible direction
            let cap_i = if i_sel < n { c - z[i_sel] } else { z[i_sel] };
            let cap_j = if j_sel < n { z[j_sel] } else { c - z[j_sel] };
            t = t.min(cap_i).min(cap_j);
            if !(t > 0.0) {
                break;
            }
            // delta_i = +t along u_i, delta_j = -t along u_j keeps u'z = 0
            z[i_sel] += t * u(i_sel);
            z[j_sel] -= t * u(j_sel);
            debug_assert!(z[i_sel] <= c + 1e-9 && z[i_sel] >= -1e-9);
            debug_assert!(z[j_sel] <= c + 1e-9 && z[j_sel] >= -1e-9);
            // beta moves by +t at pi and -t at pj
            for s in 0..2 * n {
                let p = point(s);
                g[s] += u(s) * t * (kernel[pi * n + p] - kernel[pj * n + p]);
            }
        }

        // bias: average of -u g over free variables, else the midpoint of
        // the final violating pair values.
        let mut free_sum = 0.0;
        let mut free_cnt = 0usize;
        for s in 0..2 * n {
            if z[s] > 0.0 && z[s] < c {
                free_sum += -u(s) * g[s];
                free_cnt += 1;
            }
        }
        let bias = if free_cnt > 0 {
            free_sum / free_cnt as f64
        } else {
            let mut gmax = f64::NEG_INFINITY;
            let mut gmin = f64::INFINITY;
            for s in 0..2 * n {
                let val = -u(s) * g[s];
                let in_up = if s < n { z[s] < c } else { z[s] > 0.0 };
                let in_low = if s < n { z[s] > 0.0 } else { z[s] < c };
                if in_up {
                    gmax = gmax.max(val);
                }
                if in_low {
                    gmin = gmin.min(val);
                }
            }
            0.5 * (gmax + gmin)
        };

        let mut support = Vec::new();
        let mut coefficients = Vec::new();
        for i in 0..n {
            let beta = z[i] - z[n + i];
            if beta != 0.0 {
                support.push(x[i]);
                coefficients.push(beta);
            }
        }
        Ok(SvrModel {
            support,
            coefficients,
            bias,
            gamma,
            kkt_residual: residual,
            iterations,
        })
    }

    pub fn predict(&self, x: &[f64; FEATURE_DIM]) -> f64 {
        let mut acc = self.bias;
        for (sv, beta) in self.support.iter().zip(&self.coefficients) {
            let mut d2 = 0.0;
            for t in 0..FEATURE_DIM {
                let d = sv[t] - x[t];
                d2 += d * d;
            }
            acc += beta * (-self.gamma * d2).exp();
        }
        acc
    }
}
