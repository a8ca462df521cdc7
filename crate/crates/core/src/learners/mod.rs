//! The nine supervised regressors behind one interface.
//!
//! Training happens server-side on a dataset of normalized feature
//! vectors and oracle quality targets; the trained model, its normalizer
//! and the feature-extractor thresholds are persisted together in one
//! self-describing JSON envelope so client-side prediction is fully
//! reproducible. Predictions are always clamped to [0, 1].

mod adaboost;
mod bagging;
mod boosting;
mod gpr;
mod linear;
mod neural;
mod svr;
mod tree;

pub use adaboost::{discretize, AdaBoostModel};
pub use bagging::BaggedTrees;
pub use boosting::GradientBoost;
pub use gpr::{GprModel, GprSearch};
pub use linear::LinearModel;
pub use neural::{NeuralModel, Topology, TrainConfig};
pub use svr::{SvrConfig, SvrModel};
pub use tree::{RegressionTree, FEATURE_DIM};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::nr_features::{FeatureConfig, FeatureVector, Normalizer};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

/// Persisted model format version.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Algorithm tags, ordered as in the comparative evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algo {
    Lr,
    Rt,
    ErtLsb,
    ErtBr,
    EdtAb,
    Gpr,
    Svr,
    Fnn,
    Cnn,
}

impl Algo {
    pub const ALL: [Algo; 9] = [
        Algo::Lr,
        Algo::Rt,
        Algo::ErtLsb,
        Algo::ErtBr,
        Algo::EdtAb,
        Algo::Gpr,
        Algo::Svr,
        Algo::Fnn,
        Algo::Cnn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Lr => "lr",
            Algo::Rt => "rt",
            Algo::ErtLsb => "ert-lsb",
            Algo::ErtBr => "ert-br",
            Algo::EdtAb => "edt-ab",
            Algo::Gpr => "gpr",
            Algo::Svr => "svr",
            Algo::Fnn => "fnn",
            Algo::Cnn => "cnn",
        }
    }

    pub fn parse(name: &str) -> Result<Algo> {
        let lower = name.to_ascii_lowercase().replace('_', "-");
        Algo::ALL
            .iter()
            .copied()
            .find(|a| a.name() == lower)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown algorithm `{name}` (expected one of: {})",
                    Algo::ALL.map(|a| a.name()).join(", ")
                ))
            })
    }
}

/// Hyperparameters per algorithm; defaults follow the comparative-study
/// settings (ensemble sizes 500/200, shrinkage 0.01, AdaBoost rate 0.2
/// over 100 classes, SVR cost 20 / epsilon 0.1, 20 hidden neurons).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AlgoParams {
    Lr,
    Rt {
        min_split: usize,
    },
    ErtLsb {
        n_models: usize,
        learning_rate: f64,
        min_split: usize,
    },
    ErtBr {
        n_models: usize,
        min_split: usize,
        bootstrap: bool,
    },
    EdtAb {
        n_models: usize,
        learning_rate: f64,
        n_classes: usize,
        min_split: usize,
    },
    Gpr {
        length_scale: Option<f64>,
        signal_variance: Option<f64>,
        noise_variance: Option<f64>,
        max_search_iters: usize,
    },
    Svr {
        cost: f64,
        epsilon: f64,
        tolerance: f64,
        max_iters: usize,
        gamma: Option<f64>,
    },
    Neural {
        hidden: usize,
        max_epochs: usize,
        patience: usize,
        val_fraction: f64,
        mu_init: f64,
    },
}

/// Algorithm choice plus validated hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub algo: Algo,
    pub params: AlgoParams,
}

impl LearnerSpec {
    pub fn new(algo: Algo) -> LearnerSpec {
        let params = match algo {
            Algo::Lr => AlgoParams::Lr,
            Algo::Rt => AlgoParams::Rt { min_split: 16 },
            Algo::ErtLsb => AlgoParams::ErtLsb {
                n_models: 500,
                learning_rate: 0.01,
                min_split: 16,
            },
            Algo::ErtBr => AlgoParams::ErtBr {
                n_models: 500,
                min_split: 16,
                bootstrap: true,
            },
            Algo::EdtAb => AlgoParams::EdtAb {
                n_models: 200,
                learning_rate: 0.2,
                n_classes: 100,
                min_split: 11,
            },
            Algo::Gpr => AlgoParams::Gpr {
                length_scale: None,
                signal_variance: None,
                noise_variance: None,
                max_search_iters: 60,
            },
            Algo::Svr => AlgoParams::Svr {
                cost: 20.0,
                epsilon: 0.1,
                tolerance: 1e-3,
                max_iters: 100_000,
                gamma: None,
            },
            Algo::Fnn | Algo::Cnn => AlgoParams::Neural {
                hidden: 20,
                max_epochs: 200,
                patience: 10,
                val_fraction: 0.15,
                mu_init: 1e-3,
            },
        };
        LearnerSpec { algo, params }
    }

    /// Apply `key=value` overrides; unknown keys are rejected.
    pub fn with_overrides(mut self, overrides: &[(String, String)]) -> Result<LearnerSpec> {
        for (key, value) in overrides {
            self.set_param(key, value)?;
        }
        Ok(self)
    }

    fn set_param(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse::<T>()
                .map_err(|_| Error::Usage(format!("bad value for {key}: `{value}`")))
        }
        let unknown = || {
            Error::Usage(format!(
                "unknown hyperparameter `{key}` for this algorithm"
            ))
        };
        match &mut self.params {
            AlgoParams::Lr => return Err(unknown()),
            AlgoParams::Rt { min_split } => match key {
                "min_split" => *min_split = num(key, value)?,
                _ => return Err(unknown()),
            },
            AlgoParams::ErtLsb {
                n_models,
                learning_rate,
                min_split,
            } => match key {
                "n_models" => *n_models = num(key, value)?,
                "learning_rate" => *learning_rate = num(key, value)?,
                "min_split" => *min_split = num(key, value)?,
                _ => return Err(unknown()),
            },
            AlgoParams::ErtBr {
                n_models,
                min_split,
                bootstrap,
            } => match key {
                "n_models" => *n_models = num(key, value)?,
                "min_split" => *min_split = num(key, value)?,
                "bootstrap" => *bootstrap = num(key, value)?,
                _ => return Err(unknown()),
            },
            AlgoParams::EdtAb {
                n_models,
                learning_rate,
                n_classes,
                min_split,
            } => match key {
                "n_models" => *n_models = num(key, value)?,
                "learning_rate" => *learning_rate = num(key, value)?,
                "n_classes" => *n_classes = num(key, value)?,
                "min_split" => *min_split = num(key, value)?,
                _ => return Err(unknown()),
            },
            AlgoParams::Gpr {
                length_scale,
                signal_variance,
                noise_variance,
                max_search_iters,
            } => match key {
                "length_scale" => *length_scale = Some(num(key, value)?),
                "signal_variance" => *signal_variance = Some(num(key, value)?),
                "noise_variance" => *noise_variance = Some(num(key, value)?),
                "max_search_iters" => *max_search_iters = num(key, value)?,
                _ => return Err(unknown()),
            },
            AlgoParams::Svr {
                cost,
                epsilon,
                tolerance,
                max_iters,
                gamma,
            } => match key {
                "cost" => *cost = num(key, value)?,
                "epsilon" => *epsilon = num(key, value)?,
                "tolerance" => *tolerance = num(key, value)?,
                "max_iters" => *max_iters = num(key, value)?,
                "gamma" => *gamma = Some(num(key, value)?),
                _ => return Err(unknown()),
            },
            AlgoParams::Neural {
                hidden,
                max_epochs,
                patience,
                val_fraction,
                mu_init,
            } => match key {
                "hidden" => *hidden = num(key, value)?,
                "max_epochs" => *max_epochs = num(key, value)?,
                "patience" => *patience = num(key, value)?,
                "val_fraction" => *val_fraction = num(key, value)?,
                "mu_init" => *mu_init = num(key, value)?,
                _ => return Err(unknown()),
            },
        }
        Ok(())
    }
}

/// Trained parameters, opaque per algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ModelPayload {
    Linear(LinearModel),
    Tree(RegressionTree),
    Boost(GradientBoost),
    Bagging(BaggedTrees),
    AdaBoost(AdaBoostModel),
    Gpr(GprModel),
    Svr(SvrModel),
    Neural(NeuralModel),
}

/// A trained regressor plus everything needed to reproduce its inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityModel {
    pub spec: LearnerSpec,
    pub payload: ModelPayload,
    pub normalizer: Normalizer,
    pub feature_config: FeatureConfig,
    pub train_seed: u64,
    /// Wall-clock training time; reported by the harness, not persisted
    /// (model files stay byte-reproducible).
    pub train_time_seconds: f64,
}

/// Train `spec` on the dataset. Deterministic for a fixed seed; the
/// wall-clock time around the fit is recorded on the model.
pub fn train(spec: &LearnerSpec, data: &Dataset, seed: u64) -> Result<QualityModel> {
    let n = data.len();
    let min_n = usize::max(10, FEATURE_DIM + 1);
    if n < min_n {
        return Err(Error::training(
            spec.algo.name(),
            format!("needs at least {min_n} samples, got {n}"),
        ));
    }
    let x = data.feature_matrix();
    let y = data.targets();
    let started = Instant::now();
    let payload = match (&spec.params, spec.algo) {
        (AlgoParams::Lr, _) => ModelPayload::Linear(LinearModel::fit(&x, &y)?),
        (AlgoParams::Rt { min_split }, _) => {
            let rows: Vec<usize> = (0..n).collect();
            ModelPayload::Tree(RegressionTree::fit(&x, &y, &rows, *min_split))
        }
        (
            AlgoParams::ErtLsb {
                n_models,
                learning_rate,
                min_split,
            },
            _,
        ) => ModelPayload::Boost(GradientBoost::fit(
            &x,
            &y,
            *n_models,
            *learning_rate,
            *min_split,
        )),
        (
            AlgoParams::ErtBr {
                n_models,
                min_split,
                bootstrap,
            },
            _,
        ) => ModelPayload::Bagging(BaggedTrees::fit(
            &x,
            &y,
            *n_models,
            *min_split,
            *bootstrap,
            seed,
        )),
        (
            AlgoParams::EdtAb {
                n_models,
                learning_rate,
                n_classes,
                min_split,
            },
            _,
        ) => ModelPayload::AdaBoost(AdaBoostModel::fit(
            &x,
            &y,
            *n_models,
            *learning_rate,
            *n_classes,
            *min_split,
        )?),
        (
            AlgoParams::Gpr {
                length_scale,
                signal_variance,
                noise_variance,
                max_search_iters,
            },
            _,
        ) => {
            let fixed = match (length_scale, signal_variance, noise_variance) {
                (Some(l), Some(s), Some(nv)) => Some((*l, *s, *nv)),
                (None, None, None) => None,
                _ => {
                    return Err(Error::Usage(
                        "gpr: fix all of length_scale/signal_variance/noise_variance or none"
                            .into(),
                    ))
                }
            };
            ModelPayload::Gpr(GprModel::fit(
                &x,
                &y,
                fixed,
                GprSearch {
                    max_iters: *max_search_iters,
                },
                seed,
            )?)
        }
        (
            AlgoParams::Svr {
                cost,
                epsilon,
                tolerance,
                max_iters,
                gamma,
            },
            _,
        ) => ModelPayload::Svr(SvrModel::fit(
            &x,
            &y,
            &SvrConfig {
                cost: *cost,
                epsilon: *epsilon,
                tolerance: *tolerance,
                max_iters: *max_iters,
                gamma: *gamma,
            },
        )?),
        (
            AlgoParams::Neural {
                hidden,
                max_epochs,
                patience,
                val_fraction,
                mu_init,
            },
            algo,
        ) => ModelPayload::Neural(NeuralModel::fit(
            &x,
            &y,
            *hidden,
            algo == Algo::Cnn,
            &TrainConfig {
                max_epochs: *max_epochs,
                patience: *patience,
                val_fraction: *val_fraction,
                mu_init: *mu_init,
            },
            seed,
        )?),
    };
    Ok(QualityModel {
        spec: spec.clone(),
        payload,
        normalizer: data.normalizer().clone(),
        feature_config: *data.feature_config(),
        train_seed: seed,
        train_time_seconds: started.elapsed().as_secs_f64(),
    })
}

impl QualityModel {
    /// Predict the quality index for one normalized vector; clamped to
    /// [0, 1].
    pub fn predict(&self, x: &FeatureVector) -> f64 {
        let arr = &x.0;
        let raw = match &self.payload {
            ModelPayload::Linear(m) => m.predict(arr),
            ModelPayload::Tree(m) => m.predict(arr),
            ModelPayload::Boost(m) => m.predict(arr),
            ModelPayload::Bagging(m) => m.predict(arr),
            ModelPayload::AdaBoost(m) => m.predict(arr),
            ModelPayload::Gpr(m) => m.predict(arr),
            ModelPayload::Svr(m) => m.predict(arr),
            ModelPayload::Neural(m) => m.predict(arr),
        };
        raw.clamp(0.0, 1.0)
    }

    /// Slice entry point for callers outside the typed pipeline.
    pub fn predict_slice(&self, x: &[f64]) -> Result<f64> {
        if x.len() != FEATURE_DIM {
            return Err(Error::Dimension {
                expected: FEATURE_DIM,
                got: x.len(),
            });
        }
        let mut arr = [0.0; FEATURE_DIM];
        arr.copy_from_slice(x);
        Ok(self.predict(&FeatureVector(arr)))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let envelope = ModelEnvelope {
            format_version: MODEL_FORMAT_VERSION,
            algo: self.spec.algo.name().to_string(),
            spec: self.spec.clone(),
            normalizer_bounds: *self.normalizer.bounds(),
            feature_config: self.feature_config,
            train_seed: self.train_seed,
            // Reserved: kept at zero so reruns produce identical bytes.
            train_time_seconds: 0.0,
            payload: self.payload.clone(),
        };
        let json = serde_json::to_string_pretty(&envelope)
            .map_err(|e| Error::Parse(format!("model serialization: {e}")))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<QualityModel> {
        let text = std::fs::read_to_string(path)?;
        let envelope: ModelEnvelope = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("model file: {e}")))?;
        if envelope.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported model format version {}",
                envelope.format_version
            )));
        }
        Ok(QualityModel {
            spec: envelope.spec,
            payload: envelope.payload,
            normalizer: Normalizer::from_bounds(envelope.normalizer_bounds)?,
            feature_config: envelope.feature_config,
            train_seed: envelope.train_seed,
            train_time_seconds: envelope.train_time_seconds,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ModelEnvelope {
    format_version: u32,
    algo: String,
    spec: LearnerSpec,
    normalizer_bounds: [(f64, f64); 10],
    feature_config: FeatureConfig,
    train_seed: u64,
    train_time_seconds: f64,
    payload: ModelPayload,
}
