use rand::Rng;

use crate::config::{PriorFamily, RunConfig};
use crate::data::{DataPoint, Dataset};
use crate::distributions::{GaussianFixedVar, LaplacePrior, ParticleEnsemble, Prior};
use crate::error::Result;
use crate::loss::LossSpec;
use crate::rng::{stream_rng, streams};
use crate::scalar::Scalar;
use crate::trace::{GibbsDiagnostics, RunTrace};

/// Everything observed during one Gibbs step.
#[derive(Debug, Clone)]
pub struct GibbsStep<T> {
    /// Posterior mean played before seeing `z_i`.
    pub predictor: Vec<T>,
    pub loss: T,
    pub raw_loss: T,
    pub particle_losses: Vec<T>,
    pub weights_before: Vec<T>,
    pub weights_after: Vec<T>,
    pub expected_loss_prior: T,
    pub expected_loss_posterior: T,
    pub kl: T,
    pub ess: T,
}

/// Sequential Gibbs posterior: `dQ_{i+1}/dQ_i ∝ exp(-lambda loss(., z_i))`.
#[derive(Debug, Clone)]
pub struct GibbsLearner<T: Scalar> {
    ensemble: ParticleEnsemble<T>,
    loss: LossSpec<T>,
    lambda: T,
}

impl<T: Scalar> GibbsLearner<T> {
    pub fn new(ensemble: ParticleEnsemble<T>, loss: LossSpec<T>, lambda: T) -> Self {
        Self {
            ensemble,
            loss,
            lambda,
        }
    }

    /// Draws the particle support from the configured prior.
    pub fn from_config<R: Rng + ?Sized>(cfg: &RunConfig<T>, dim: usize, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let prior = match cfg.prior {
            PriorFamily::Gaussian => Prior::Gaussian(GaussianFixedVar::centered(dim, cfg.sigma)?),
            PriorFamily::Laplace => Prior::Laplace(LaplacePrior::new(dim)?),
        };
        let ensemble = ParticleEnsemble::init(&prior, cfg.particles, rng)?;
        Ok(Self::new(ensemble, cfg.loss, cfg.lambda))
    }

    pub fn ensemble(&self) -> &ParticleEnsemble<T> {
        &self.ensemble
    }

    pub fn into_ensemble(self) -> ParticleEnsemble<T> {
        self.ensemble
    }

    pub fn predictor(&self) -> Result<Vec<T>> {
        self.ensemble.posterior_mean()
    }

    pub fn step(&mut self, z: &DataPoint<T>) -> Result<GibbsStep<T>> {
        let predictor = self.predictor()?;
        let raw_loss = self.loss.raw(&predictor, z)?;
        let loss = raw_loss.min(self.loss.threshold);
        let log_before = self.ensemble.log_probabilities()?;
        let particle_losses = self.ensemble.gibbs_update(&self.loss, z, self.lambda)?;
        let log_after = self.ensemble.log_probabilities()?;
        let weights_before: Vec<T> = log_before.iter().map(|l| l.exp()).collect();
        let weights_after: Vec<T> = log_after.iter().map(|l| l.exp()).collect();
        let dot = |w: &[T]| -> T { w.iter().zip(&particle_losses).map(|(&a, &b)| a * b).sum() };
        let expected_loss_prior = dot(&weights_before);
        let expected_loss_posterior = dot(&weights_after);
        let kl = weights_after
            .iter()
            .zip(log_after.iter().zip(&log_before))
            .filter(|(&p, _)| p > T::zero())
            .map(|(&p, (&la, &lb))| p * (la - lb))
            .sum::<T>()
            .max(T::zero());
        let ess = T::one() / weights_after.iter().map(|&p| p * p).sum::<T>();
        Ok(GibbsStep {
            predictor,
            loss,
            raw_loss,
            particle_losses,
            weights_before,
            weights_after,
            expected_loss_prior,
            expected_loss_posterior,
            kl,
            ess,
        })
    }
}

/// Predicts with the posterior mean, records the loss, then reweights.
pub fn opb_gibbs_run<T: Scalar>(cfg: &RunConfig<T>, data: &Dataset<T>) -> Result<RunTrace<T>> {
    let mut rng = stream_rng(cfg.seed, streams::ALGORITHM);
    let mut learner = GibbsLearner::from_config(cfg, data.dim(), &mut rng)?;
    let m = data.len();
    let mut losses = Vec::with_capacity(m);
    let mut predictors = Vec::with_capacity(m);
    let mut ess = Vec::with_capacity(m);
    let mut prior_exp = Vec::with_capacity(m);
    let mut post_exp = Vec::with_capacity(m);
    let mut kl = Vec::with_capacity(m);
    let mut max_raw = T::zero();
    for z in data.iter() {
        let s = learner.step(z)?;
        max_raw = max_raw.max(s.raw_loss);
        losses.push(s.loss);
        predictors.push(s.predictor);
        ess.push(s.ess);
        prior_exp.push(s.expected_loss_prior);
        post_exp.push(s.expected_loss_posterior);
        kl.push(s.kl);
    }
    let mut trace = RunTrace::new(cfg.algorithm, losses, predictors, max_raw);
    trace.gibbs = Some(GibbsDiagnostics {
        ess,
        expected_loss_prior: prior_exp,
        expected_loss_posterior: post_exp,
        kl,
        final_ensemble: learner.into_ensemble(),
    });
    Ok(trace)
}
