//! Online PAC-Bayes learners and bounds.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the bottom fix the common `f64` and `f32` instantiations.

// `!(x > 0)` is deliberate: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod bounds;
pub mod config;
pub mod data;
pub mod dataio;
pub mod distributions;
pub mod error;
pub mod loss;
pub mod rng;
pub mod scalar;
pub mod trace;
pub mod vector;
pub mod verify;

pub use config::{AlgorithmId, OpbdVariant, PriorFamily, PriorMeanRule, RunConfig};
pub use data::{DataPoint, Dataset, Task};
pub use error::{Error, Result};
pub use loss::{LossFamily, LossSpec};
pub use scalar::Scalar;
pub use trace::RunTrace;

pub type DataPoint64 = DataPoint<f64>;
pub type Dataset64 = Dataset<f64>;
pub type LossSpec64 = LossSpec<f64>;
pub type RunConfig64 = RunConfig<f64>;
pub type RunTrace64 = RunTrace<f64>;
pub type ParticleEnsemble64 = distributions::ParticleEnsemble<f64>;

pub type DataPoint32 = DataPoint<f32>;
pub type Dataset32 = Dataset<f32>;
pub type LossSpec32 = LossSpec<f32>;
pub type RunConfig32 = RunConfig<f32>;
pub type RunTrace32 = RunTrace<f32>;
pub type ParticleEnsemble32 = distributions::ParticleEnsemble<f32>;
