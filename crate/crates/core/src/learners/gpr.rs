//! Exact Gaussian-process regression with a constant mean basis and a
//! squared-exponential kernel.
//!
//! Targets are zero-meaned through the constant basis (the fitted mean is
//! the target average, so far-field predictions fall back to it instead
//! of running away). Hyperparameters (length scale, signal variance,
//! noise variance) are fitted by maximizing the log marginal likelihood
//! with a seeded Nelder-Mead search in log space from three fixed
//! multi-starts; the best point over every evaluation (starts included)
//! wins. The noise variance is floored for conditioning, and
//! factorization failures escalate a diagonal jitter from 1e-8 by
//! factors of ten up to 1e-2 before giving up.

use super::tree::FEATURE_DIM;
use crate::error::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GprModel {
    pub train_x: Vec<[f64; FEATURE_DIM]>,
    pub alpha: Vec<f64>,
    pub mean: f64,
    pub length_scale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
    pub log_marginal_likelihood: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct GprSearch {
    pub max_iters: usize,
}

impl Default for GprSearch {
    fn default() -> Self {
        GprSearch { max_iters: 60 }
    }
}

const JITTER_START: f64 = 1e-8;
const JITTER_MAX: f64 = 1e-2;
/// Conditioning floor on the fitted noise variance (targets live in [0,1]).
const NOISE_FLOOR: f64 = 1e-6;

impl GprModel {
    pub fn fit(
        x: &[[f64; FEATURE_DIM]],
        y: &[f64],
        fixed: Option<(f64, f64, f64)>,
        search: GprSearch,
        seed: u64,
    ) -> Result<GprModel> {
        let sq = SquaredDistances::new(x);
        let n = y.len();
        let mean = y.iter().sum::<f64>() / n as f64;
        let centered: Vec<f64> = y.iter().map(|v| v - mean).collect();
        let (theta, lml) = match fixed {
            Some((ell, sf2, sn2)) => {
                let t = [ell.ln(), sf2.ln(), sn2.max(0.0).ln()];
                let lml = log_marginal(&sq, &centered, &t)
                    .ok_or_else(|| Error::training("gpr", "kernel matrix not factorizable"))?;
                (t, lml)
            }
            None => optimize_hyperparameters(&sq, &centered, search, seed)?,
        };
        let (ell, sf2, sn2) = (theta[0].exp(), theta[1].exp(), theta[2].exp());
        let (chol, _) = factor(&sq, theta)
            .ok_or_else(|| Error::training("gpr", "kernel matrix not factorizable"))?;
        let rv = DVector::from_iterator(n, centered.iter().copied());
        let alpha = chol.solve(&rv);
        Ok(GprModel {
            train_x: x.to_vec(),
            alpha: alpha.as_slice().to_vec(),
            mean,
            length_scale: ell,
            signal_variance: sf2,
            noise_variance: sn2,
            log_marginal_likelihood: lml,
        })
    }

    pub fn predict(&self, x: &[f64; FEATURE_DIM]) -> f64 {
        let inv = -0.5 / (self.length_scale * self.length_scale);
        let mut acc = self.mean;
        for (xi, a) in self.train_x.iter().zip(&self.alpha) {
            let mut d2 = 0.0;
            for k in 0..FEATURE_DIM {
                let d = xi[k] - x[k];
                d2 += d * d;
            }
            acc += a * self.signal_variance * (d2 * inv).exp();
        }
        acc
    }
}

/// Cached pairwise squared distances.
struct SquaredDistances {
    n: usize,
    d2: Vec<f64>,
}

impl SquaredDistances {
    fn new(x: &[[f64; FEATURE_DIM]]) -> Self {
        let n = x.len();
        let mut d2 = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let mut acc = 0.0;
                for k in 0..FEATURE_DIM {
                    let d = x[i][k] - x[j][k];
                    acc += d * d;
                }
                d2[i * n + j] = acc;
                d2[j * n + i] = acc;
            }
        }
        SquaredDistances { n, d2 }
    }
}

/// Build and factor K(theta), escalating jitter on failure. Returns the
/// factorization and the jitter that made it succeed.
fn factor(sq: &SquaredDistances, theta: [f64; 3]) -> Option<(Cholesky<f64, nalgebra::Dyn>, f64)> {
    let n = sq.n;
    let (ell, sf2, sn2) = (theta[0].exp(), theta[1].exp(), theta[2].exp().max(NOISE_FLOOR));
    if !(ell.is_finite() && sf2.is_finite() && sn2.is_finite()) {
        return None;
    }
    let inv = -0.5 / (ell * ell);
    let mut jitter = 0.0f64;
    loop {
        let k = DMatrix::from_fn(n, n, |i, j| {
            let base = sf2 * (sq.d2[i * n + j] * inv).exp();
            if i == j {
                base + sn2 + jitter
            } else {
                base
            }
        });
        if let Some(chol) = Cholesky::new(k) {
            return Some((chol, jitter));
        }
        jitter = if jitter == 0.0 { JITTER_START } else { jitter * 10.0 };
        if jitter > JITTER_MAX {
            return None;
        }
    }
}

/// Log marginal likelihood of the zero-meaned targets.
fn log_marginal(sq: &SquaredDistances, centered: &[f64], theta: &[f64; 3]) -> Option<f64> {
    let (chol, _) = factor(sq, *theta)?;
    let n = centered.len();
    let rv = DVector::from_iterator(n, centered.iter().copied());
    let alpha = chol.solve(&rv);
    let quad = rv.dot(&alpha);
    let logdet: f64 = (0..n).map(|i| chol.l_dirty()[(i, i)].ln()).sum::<f64>() * 2.0;
    let lml = -0.5 * quad - 0.5 * logdet - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    lml.is_finite().then_some(lml)
}

/// Three fixed multi-starts, seeded Nelder-Mead each, best point wins.
/// The search is boxed to the interpolation regime: without bounds the
/// likelihood of smooth deterministic targets runs off into huge-variance
/// near-flat kernels that extrapolate wildly.
fn optimize_hyperparameters(
    sq: &SquaredDistances,
    y: &[f64],
    search: GprSearch,
    seed: u64,
) -> Result<([f64; 3], f64)> {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = (y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).max(1e-6);
    // Length scale spans the normalized feature cube; the amplitude cap
    // keeps the kernel in the interpolation regime; the noise floor is
    // the usual fraction-of-target-variance bound local optimizers use.
    let bounds = [
        (0.05f64.ln(), 20.0f64.ln()),
        ((1e-4 * var).ln(), (50.0 * var).ln()),
        ((1e-2 * var).max(NOISE_FLOOR).ln(), 1.0f64.ln()),
    ];
    let in_box = move |t: &[f64; 3]| {
        t.iter()
            .zip(&bounds)
            .all(|(v, (lo, hi))| v.is_finite() && *v >= *lo && *v <= *hi)
    };
    let starts = [
        [1.0f64.ln(), var.ln(), (0.1 * var).max(NOISE_FLOOR).ln()],
        [0.3f64.ln(), var.ln(), (0.02 * var).max(NOISE_FLOOR).ln()],
        [3.0f64.ln(), var.ln(), var.max(NOISE_FLOOR).ln()],
    ];
    let mut best: Option<([f64; 3], f64)> = None;
    let consider = |theta: [f64; 3], lml: f64, best: &mut Option<([f64; 3], f64)>| {
        if best.map_or(true, |(_, b)| lml > b) {
            *best = Some((theta, lml));
        }
    };
    for (si, start) in starts.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(crate::seed::derive_seed(seed, &[si as u64]));
        if let Some(lml) = log_marginal(sq, y, start) {
            consider(*start, lml, &mut best);
        }
        let result = nelder_mead(
            |t| {
                if !in_box(t) {
                    return None;
                }
                log_marginal(sq, y, t).map(|v| -v)
            },
            *start,
            search.max_iters,
            &mut rng,
        );
        if let Some((theta, neg)) = result {
            consider(theta, -neg, &mut best);
        }
    }
    best.ok_or_else(|| Error::training("gpr", "no hyperparameter start was factorizable"))
}

/// Minimal Nelder-Mead on R^3 with seeded initial-simplex perturbations.
/// Returns the best vertex visited; `None` when no start evaluates.
fn nelder_mead<F: FnMut(&[f64; 3]) -> Option<f64>>(
    mut f: F,
    start: [f64; 3],
    max_iters: usize,
    rng: &mut ChaCha8Rng,
) -> Option<([f64; 3], f64)> {
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;
    let penalty = 1e60;
    let mut eval = |t: &[f64; 3]| f(t).unwrap_or(penalty);
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    let v0 = eval(&start);
    simplex.push((start, v0));
    for k in 0..3 {
        let mut p = start;
        p[k] += 0.4 * (1.0 + 0.25 * (rng.gen::<f64>() - 0.5));
        let v = eval(&p);
        simplex.push((p, v));
    }
    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let centroid = {
            let mut c = [0.0; 3];
            for (p, _) in &simplex[..3] {
                for k in 0..3 {
                    c[k] += p[k] / 3.0;
                }
            }
            c
        };
        let worst = simplex[3];
        let reflect: [f64; 3] =
            std::array::from_fn(|k| centroid[k] + ALPHA * (centroid[k] - worst.0[k]));
        let fr = eval(&reflect);
        if fr < simplex[0].1 {
            let expand: [f64; 3] =
                std::array::from_fn(|k| centroid[k] + GAMMA * (reflect[k] - centroid[k]));
            let fe = eval(&expand);
            simplex[3] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (reflect, fr);
        } else {
            let contract: [f64; 3] =
                std::array::from_fn(|k| centroid[k] + RHO * (worst.0[k] - centroid[k]));
            let fc = eval(&contract);
            if fc < worst.1 {
                simplex[3] = (contract, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    let shrunk: [f64; 3] =
                        std::array::from_fn(|k| best[k] + SIGMA * (v.0[k] - best[k]));
                    let fv = eval(&shrunk);
                    *v = (shrunk, fv);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (simplex[0].1 < penalty).then_some(simplex[0])
}
