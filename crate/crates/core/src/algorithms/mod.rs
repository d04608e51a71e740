//! The three online learners and a dispatcher over [`AlgorithmId`].

mod gibbs;
mod ogd;
mod opbd;

pub use gibbs::{opb_gibbs_run, GibbsLearner, GibbsStep};
pub use ogd::{ogd_regret_bound, ogd_run, OgdLearner, OgdState, OgdStep};
pub use opbd::{opbd_run, opbd_step, OpbdLearner, OpbdLearnerStep, OpbdState, OpbdStep};

use crate::config::{AlgorithmId, RunConfig};
use crate::data::Dataset;
use crate::error::Result;
use crate::scalar::Scalar;
use crate::trace::RunTrace;

/// Runs the learner selected by `cfg.algorithm` over the whole stream.
pub fn run<T: Scalar>(cfg: &RunConfig<T>, data: &Dataset<T>) -> Result<RunTrace<T>> {
    match cfg.algorithm {
        AlgorithmId::Ogd => ogd_run(cfg, data),
        AlgorithmId::OpbGibbs => opb_gibbs_run(cfg, data),
        AlgorithmId::Opbd => opbd_run(cfg, data),
    }
}
