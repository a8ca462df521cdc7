//! Ordinary least squares with an appended all-ones column.

use super::tree::FEATURE_DIM;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    /// Solve the least-squares problem through SVD; rank-deficient
    /// systems get the minimum-norm solution.
    pub fn fit(x: &[[f64; FEATURE_DIM]], y: &[f64]) -> Result<LinearModel> {
        let n = x.len();
        let design = DMatrix::from_fn(n, FEATURE_DIM + 1, |r, c| {
            if c < FEATURE_DIM {
                x[r][c]
            } else {
                1.0
            }
        });
        let rhs = DVector::from_iterator(n, y.iter().copied());
        let svd = design.svd(true, true);
        let solution = svd
            .solve(&rhs, f64::EPSILON * n.max(FEATURE_DIM + 1) as f64)
            .map_err(|e| Error::training("lr", e))?;
        Ok(LinearModel {
            weights: solution.as_slice()[..FEATURE_DIM].to_vec(),
            intercept: solution[FEATURE_DIM],
        })
    }

    pub fn predict(&self, x: &[f64; FEATURE_DIM]) -> f64 {
        self.intercept
            + self
                .weights
                .iter()
                .zip(x.iter())
                .map(|(w, v)| w * v)
                .sum::<f64>()
    }
}
