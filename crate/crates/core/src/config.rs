//! Per-run configuration and the hyperparameter defaults of the reference
//! experimental protocol.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::loss::LossSpec;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmId {
    /// Projected online gradient descent.
    Ogd,
    /// Sequential Gibbs posterior over a particle ensemble.
    OpbGibbs,
    /// Disintegrated Gaussian updates with fixed variance.
    Opbd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorFamily {
    /// Centered isotropic Gaussian with standard deviation `sigma`.
    Gaussian,
    /// Iid standard Laplace coordinates.
    Laplace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpbdVariant {
    /// Disintegrated log-density-ratio penalty.
    Psi1,
    /// Divergence penalty between the means, free of the noise draw.
    Psi2,
}

/// How the prior mean `w_i^0` of an OPBD step is formed from the current
/// mean `w_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", bound = "")]
pub enum PriorMeanRule<T: Scalar> {
    /// `w_i^0 = w_i`
    SelfChain,
    /// `w_i^0 = w_i + scale * xi` with `xi` standard normal, drawn from a
    /// dedicated stream.
    Noised { scale: T },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RunConfig<T: Scalar> {
    pub algorithm: AlgorithmId,
    pub loss: LossSpec<T>,
    /// Scale parameter of the Gibbs and OPBD updates.
    pub lambda: T,
    /// Standard deviation: Gaussian prior (Gibbs) or fixed noise (OPBD).
    pub sigma: T,
    pub delta: T,
    pub seed: u64,
    pub particles: usize,
    pub prior: PriorFamily,
    pub variant: OpbdVariant,
    pub prior_mean: PriorMeanRule<T>,
    /// OGD step size.
    pub eta: T,
    /// OGD projection radius; `None` means no projection.
    pub radius: Option<T>,
}

impl<T: Scalar> RunConfig<T> {
    fn base(algorithm: AlgorithmId, m: usize, loss: LossSpec<T>) -> Self {
        let m = T::lit(m.max(1) as f64);
        Self {
            algorithm,
            loss,
            lambda: T::one() / m,
            sigma: T::one(),
            delta: T::lit(0.05),
            seed: 0,
            particles: 2000,
            prior: PriorFamily::Gaussian,
            variant: OpbdVariant::Psi1,
            prior_mean: PriorMeanRule::SelfChain,
            eta: T::one() / m.sqrt(),
            radius: None,
        }
    }

    /// OGD from the origin with `eta = 1/sqrt(m)`.
    pub fn ogd(m: usize, loss: LossSpec<T>) -> Self {
        Self::base(AlgorithmId::Ogd, m, loss)
    }

    /// Gibbs posterior with `lambda = 1/m` and a centered Gaussian prior of
    /// standard deviation 1.5.
    pub fn gibbs_gaussian(m: usize, loss: LossSpec<T>) -> Self {
        Self {
            sigma: T::lit(1.5),
            ..Self::base(AlgorithmId::OpbGibbs, m, loss)
        }
    }

    /// Gibbs posterior with `lambda = 1/m` and a standard Laplace prior.
    pub fn gibbs_laplace(m: usize, loss: LossSpec<T>) -> Self {
        Self {
            prior: PriorFamily::Laplace,
            ..Self::base(AlgorithmId::OpbGibbs, m, loss)
        }
    }

    /// OPBD with the first penalty: `lambda = 1e-4/m`, `sigma = 3e-3`.
    pub fn opbd_psi1(m: usize, loss: LossSpec<T>) -> Self {
        let mut cfg = Self::base(AlgorithmId::Opbd, m, loss);
        cfg.lambda = T::lit(1e-4 / m.max(1) as f64);
        cfg.sigma = T::lit(3e-3);
        cfg.variant = OpbdVariant::Psi1;
        cfg
    }

    /// OPBD with the second penalty: `lambda = 2e-3/m`, `sigma = 1e-2`.
    pub fn opbd_psi2(m: usize, loss: LossSpec<T>) -> Self {
        let mut cfg = Self::base(AlgorithmId::Opbd, m, loss);
        cfg.lambda = T::lit(2e-3 / m.max(1) as f64);
        cfg.sigma = T::lit(1e-2);
        cfg.variant = OpbdVariant::Psi2;
        cfg
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn sigma_sq(&self) -> T {
        self.sigma * self.sigma
    }

    /// Checks parameter ranges. `lambda = 0` is accepted as the no-update
    /// limit of the Gibbs and OPBD learners.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return Err(invalid("lambda", "must be finite and non-negative"));
        }
        if !(self.sigma > T::zero()) || !self.sigma.is_finite() {
            return Err(invalid("sigma", "must be positive and finite"));
        }
        if !(self.delta > T::zero() && self.delta < T::one()) {
            return Err(invalid("delta", "must lie in (0, 1)"));
        }
        if self.particles == 0 {
            return Err(invalid("particles", "need at least one particle"));
        }
        if !(self.eta > T::zero()) || !self.eta.is_finite() {
            return Err(invalid("eta", "must be positive and finite"));
        }
        if let Some(r) = self.radius {
            if !(r > T::zero()) {
                return Err(invalid("radius", "must be positive"));
            }
        }
        if let PriorMeanRule::Noised { scale } = self.prior_mean {
            if !(scale >= T::zero()) || !scale.is_finite() {
                return Err(invalid("prior_mean.scale", "must be finite and non-negative"));
            }
        }
        Ok(())
    }
}
