//! Disintegrated updates for fixed-variance Gaussians.
//!
//! Step `i` solves `argmin_w loss(w + eps, z) + Psi(w + eps, w, w0)`. With
//! `u = w + eps` both penalties become a proximal problem with step
//! `tau = lambda * sigma^2`:
//!
//! * `Psi1 = (||w + eps - w0||^2 - ||eps||^2) / (2 sigma^2 lambda)`: the
//!   `||eps||^2` term is constant, the anchor is `w0`.
//! * `Psi2 = ||w - w0||^2 / (2 sigma^2 lambda)`: the anchor is `w0 + eps`.
//!
//! In both cases `w_{i+1} = u* - eps` and the played predictor is `u*`.

use rand::Rng;

use crate::config::{OpbdVariant, PriorMeanRule, RunConfig};
use crate::data::{DataPoint, Dataset};
use crate::distributions::{disintegrated_log_ratio, kl_gaussian_fixed_var, GaussianFixedVar};
use crate::error::{invalid, Result};
use crate::loss::LossSpec;
use crate::rng::{stream_rng, streams, StreamRng};
use crate::scalar::Scalar;
use crate::trace::{OpbdDiagnostics, RunTrace};
use crate::vector::{add, check_dim, sub};

#[derive(Debug, Clone, PartialEq)]
pub struct OpbdState<T> {
    pub mean: Vec<T>,
    pub sigma_sq: T,
    pub lambda: T,
    pub variant: OpbdVariant,
}

impl<T: Scalar> OpbdState<T> {
    pub fn new(mean: Vec<T>, sigma_sq: T, lambda: T, variant: OpbdVariant) -> Result<Self> {
        if !(sigma_sq > T::zero()) || !sigma_sq.is_finite() {
            return Err(invalid("sigma_sq", "must be positive and finite"));
        }
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(invalid("lambda", "must be finite and non-negative"));
        }
        Ok(Self {
            mean,
            sigma_sq,
            lambda,
            variant,
        })
    }

    pub fn tau(&self) -> T {
        self.lambda * self.sigma_sq
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpbdStep<T> {
    /// `w_{i+1}`
    pub next_mean: Vec<T>,
    /// `h_i = w_{i+1} + eps_i`
    pub predictor: Vec<T>,
    pub loss: T,
    pub raw_loss: T,
    /// First penalty at the solution, divided by lambda.
    pub psi1: T,
    /// Second penalty at the solution, divided by lambda.
    pub psi2: T,
}

fn over_lambda<T: Scalar>(value: T, lambda: T) -> T {
    if lambda > T::zero() {
        value / lambda
    } else if value == T::zero() {
        T::zero()
    } else {
        T::infinity()
    }
}

/// One update of the disintegrated algorithm with an injected noise draw.
pub fn opbd_step<T: Scalar>(
    state: &OpbdState<T>,
    prior_mean: &[T],
    z: &DataPoint<T>,
    eps: &[T],
    loss: &LossSpec<T>,
) -> Result<OpbdStep<T>> {
    let d = z.dim();
    check_dim(d, state.mean.len())?;
    check_dim(d, prior_mean.len())?;
    check_dim(d, eps.len())?;
    let anchor = match state.variant {
        OpbdVariant::Psi1 => prior_mean.to_vec(),
        OpbdVariant::Psi2 => add(prior_mean, eps),
    };
    let tau = state.tau();
    // tau = 0 is the lambda -> 0 limit: the proximal point is its anchor.
    let u = if tau > T::zero() {
        loss.prox(z, &anchor, tau)?
    } else {
        anchor
    };
    let next_mean = sub(&u, eps);
    let raw_loss = loss.raw_unchecked(&u, z);
    let log_ratio = disintegrated_log_ratio(&u, &next_mean, prior_mean, state.sigma_sq)?;
    let kl = kl_gaussian_fixed_var(&next_mean, prior_mean, state.sigma_sq)?;
    Ok(OpbdStep {
        next_mean,
        loss: raw_loss.min(loss.threshold),
        raw_loss,
        predictor: u,
        psi1: over_lambda(log_ratio, state.lambda),
        psi2: over_lambda(kl, state.lambda),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpbdLearnerStep<T> {
    pub prior_mean: Vec<T>,
    pub eps: Vec<T>,
    /// `w_i + eps_i`, a draw of the measure available before `z_i`.
    pub test_predictor: Vec<T>,
    pub test_loss: T,
    pub test_raw_loss: T,
    pub update: OpbdStep<T>,
}

/// Algorithm state plus the prior-mean rule and noise law.
#[derive(Debug, Clone)]
pub struct OpbdLearner<T: Scalar> {
    state: OpbdState<T>,
    loss: LossSpec<T>,
    rule: PriorMeanRule<T>,
    noise: GaussianFixedVar<T>,
    prior_rng: StreamRng,
}

impl<T: Scalar> OpbdLearner<T> {
    /// `prior_seed` keys the generator of the noised prior-mean rule; the
    /// step noise comes from the generator passed to [`OpbdLearner::step`].
    pub fn new(state: OpbdState<T>, loss: LossSpec<T>, rule: PriorMeanRule<T>, prior_seed: u64) -> Result<Self> {
        let noise = GaussianFixedVar::new(vec![T::zero(); state.mean.len()], state.sigma_sq)?;
        Ok(Self {
            state,
            loss,
            rule,
            noise,
            prior_rng: stream_rng(prior_seed, streams::PRIOR_NOISE),
        })
    }

    /// Starts from the origin.
    pub fn from_config(cfg: &RunConfig<T>, dim: usize) -> Result<Self> {
        cfg.validate()?;
        let state = OpbdState::new(vec![T::zero(); dim], cfg.sigma_sq(), cfg.lambda, cfg.variant)?;
        Self::new(state, cfg.loss, cfg.prior_mean, cfg.seed)
    }

    pub fn state(&self) -> &OpbdState<T> {
        &self.state
    }

    pub fn mean(&self) -> &[T] {
        &self.state.mean
    }

    pub fn sigma_sq(&self) -> T {
        self.state.sigma_sq
    }

    pub fn step<R: Rng + ?Sized>(&mut self, z: &DataPoint<T>, rng: &mut R) -> Result<OpbdLearnerStep<T>> {
        let prior_mean = match self.rule {
            PriorMeanRule::SelfChain => self.state.mean.clone(),
            PriorMeanRule::Noised { scale } => self
                .state
                .mean
                .iter()
                .map(|&w| w + scale * T::sample_standard_normal(&mut self.prior_rng))
                .collect(),
        };
        let eps = self.noise.sample_noise(rng);
        let test_predictor = add(&self.state.mean, &eps);
        let test_raw_loss = self.loss.raw(&test_predictor, z)?;
        let update = opbd_step(&self.state, &prior_mean, z, &eps, &self.loss)?;
        self.state.mean = update.next_mean.clone();
        Ok(OpbdLearnerStep {
            prior_mean,
            eps,
            test_predictor,
            test_loss: test_raw_loss.min(self.loss.threshold),
            test_raw_loss,
            update,
        })
    }
}

/// Runs the disintegrated algorithm from the origin with fresh noise at every
/// step. The main trace scores `h_i = w_{i+1} + eps_i`; the test-mode
/// diagnostics score `w_i + eps_i`.
pub fn opbd_run<T: Scalar>(cfg: &RunConfig<T>, data: &Dataset<T>) -> Result<RunTrace<T>> {
    let mut rng = stream_rng(cfg.seed, streams::ALGORITHM);
    let mut learner = OpbdLearner::from_config(cfg, data.dim())?;
    let m = data.len();
    let mut losses = Vec::with_capacity(m);
    let mut predictors = Vec::with_capacity(m);
    let mut test_losses = Vec::with_capacity(m);
    let mut test_predictors = Vec::with_capacity(m);
    let mut means = Vec::with_capacity(m + 1);
    let mut prior_means = Vec::with_capacity(m);
    let mut psi1 = Vec::with_capacity(m);
    let mut psi2 = Vec::with_capacity(m);
    let mut max_raw = T::zero();
    means.push(learner.mean().to_vec());
    for z in data.iter() {
        let s = learner.step(z, &mut rng)?;
        max_raw = max_raw.max(s.update.raw_loss).max(s.test_raw_loss);
        losses.push(s.update.loss);
        predictors.push(s.update.predictor);
        test_losses.push(s.test_loss);
        test_predictors.push(s.test_predictor);
        means.push(s.update.next_mean);
        prior_means.push(s.prior_mean);
        psi1.push(s.update.psi1);
        psi2.push(s.update.psi2);
    }
    let mut trace = RunTrace::new(cfg.algorithm, losses, predictors, max_raw);
    trace.opbd = Some(OpbdDiagnostics {
        test_losses,
        test_predictors,
        means,
        prior_means,
        psi1,
        psi2,
    });
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: &[f64], y: f64) -> DataPoint<f64> {
        DataPoint::new(x.to_vec(), y)
    }

    #[test]
    fn psi1_hinge_example() {
        // lambda * sigma^2 = 0.5
        let state = OpbdState::new(vec![0.0], 0.5, 1.0, OpbdVariant::Psi1).unwrap();
        let loss = LossSpec::hinge(10.0).unwrap();
        let s = opbd_step(&state, &[0.0], &pt(&[1.0], 1.0), &[0.1], &loss).unwrap();
        assert!((s.predictor[0] - 0.5).abs() < 1e-15);
        assert!((s.next_mean[0] - 0.4).abs() < 1e-15);
        assert!((s.loss - 0.5).abs() < 1e-15);
    }

    #[test]
    fn variants_coincide_without_noise() {
        let loss = LossSpec::squared(100.0).unwrap();
        let z = pt(&[0.3, -1.2], 0.7);
        let w0 = [0.2, 0.1];
        let a = OpbdState::new(vec![0.0, 0.0], 0.3, 2.0, OpbdVariant::Psi1).unwrap();
        let b = OpbdState { variant: OpbdVariant::Psi2, ..a.clone() };
        let sa = opbd_step(&a, &w0, &z, &[0.0, 0.0], &loss).unwrap();
        let sb = opbd_step(&b, &w0, &z, &[0.0, 0.0], &loss).unwrap();
        assert_eq!(sa.next_mean, sb.next_mean);
        assert_eq!(sa.next_mean, loss.prox(&z, &w0, 0.6).unwrap());
    }

    #[test]
    fn vanishing_scale_returns_anchor() {
        let loss = LossSpec::squared(100.0).unwrap();
        let z = pt(&[1.0, 2.0], 3.0);
        let w0 = [0.5, -0.5];
        let eps = [0.01, -0.02];
        let psi2 = OpbdState::new(vec![0.0, 0.0], 1.0, 1e-12, OpbdVariant::Psi2).unwrap();
        let s = opbd_step(&psi2, &w0, &z, &eps, &loss).unwrap();
        for (a, b) in s.next_mean.iter().zip(&w0) {
            assert!((a - b).abs() < 1e-9);
        }
        let psi1 = OpbdState { variant: OpbdVariant::Psi1, ..psi2 };
        let s = opbd_step(&psi1, &w0, &z, &eps, &loss).unwrap();
        for ((a, b), e) in s.next_mean.iter().zip(&w0).zip(&eps) {
            assert!((a - (b - e)).abs() < 1e-9);
        }
    }

    #[test]
    fn penalties_match_definitions() {
        let loss = LossSpec::hinge(10.0).unwrap();
        let state = OpbdState::new(vec![0.0, 0.0], 0.25, 2.0, OpbdVariant::Psi1).unwrap();
        let eps = [0.3, -0.1];
        let w0 = [0.1, 0.2];
        let s = opbd_step(&state, &w0, &pt(&[1.0, 1.0], 1.0), &eps, &loss).unwrap();
        let h = &s.predictor;
        let d2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
        let psi1 = (d2(h, &w0) - d2(&eps, &[0.0, 0.0])) / (2.0 * 0.25 * 2.0);
        let psi2 = d2(&s.next_mean, &w0) / (2.0 * 0.25 * 2.0);
        assert!((s.psi1 - psi1).abs() < 1e-12);
        assert!((s.psi2 - psi2).abs() < 1e-12);
    }

    #[test]
    fn dimension_errors() {
        let loss = LossSpec::hinge(10.0).unwrap();
        let state = OpbdState::new(vec![0.0], 0.25, 2.0, OpbdVariant::Psi1).unwrap();
        assert!(opbd_step(&state, &[0.0, 0.0], &pt(&[1.0], 1.0), &[0.0], &loss).is_err());
        assert!(opbd_step(&state, &[0.0], &pt(&[1.0], 1.0), &[0.0, 1.0], &loss).is_err());
    }
}
