//! No-reference video quality prediction toolkit.
//!
//! Pipeline: seeded procedural clips ([`synth`]) go through a
//! deterministic compression-and-loss channel ([`impairment`]); the
//! received clips are characterized by eight content features plus two
//! network features ([`nr_features`]); a full-reference oracle
//! ([`fr_benchmark`]) provides the ground-truth quality index; the grid
//! of samples ([`dataset`]) trains nine supervised regressors
//! ([`learners`]); the evaluation harness ([`eval`]) reproduces blind,
//! cross-validated, size-sweep and timing experiments with Pearson
//! correlation as the accuracy measure.

pub mod dataset;
pub mod eval;
pub mod error;
pub mod frame_io;
pub mod fr_benchmark;
pub mod impairment;
pub mod learners;
pub mod nr_features;
pub(crate) mod par;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
