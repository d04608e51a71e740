//! Per-step records of an online run.

use crate::config::AlgorithmId;
use crate::distributions::ParticleEnsemble;
use crate::scalar::Scalar;
use crate::vector::norm;

/// Running average `sum_{i<=t} loss_i / t` for every prefix.
pub fn running_average<T: Scalar>(losses: &[T]) -> Vec<T> {
    let mut acc = T::zero();
    losses
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            acc = acc + l;
            acc / T::lit((i + 1) as f64)
        })
        .collect()
}

/// Extra per-step quantities of a disintegrated run.
#[derive(Debug, Clone, PartialEq)]
pub struct OpbdDiagnostics<T> {
    /// Losses of `w_i + eps_i`, a draw from the data-free-at-step-i measure.
    pub test_losses: Vec<T>,
    pub test_predictors: Vec<Vec<T>>,
    /// Means `w_1 .. w_{m+1}`.
    pub means: Vec<Vec<T>>,
    /// Prior means `w_i^0` used at each step.
    pub prior_means: Vec<Vec<T>>,
    /// First penalty (already divided by lambda) evaluated at each step.
    pub psi1: Vec<T>,
    /// Second penalty (already divided by lambda) evaluated at each step.
    pub psi2: Vec<T>,
}

/// Extra per-step quantities of a Gibbs run.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsDiagnostics<T> {
    pub ess: Vec<T>,
    /// `E_{h ~ Q_i}[loss(h, z_i)]` before the update.
    pub expected_loss_prior: Vec<T>,
    /// `E_{h ~ Q_{i+1}}[loss(h, z_i)]` after the update.
    pub expected_loss_posterior: Vec<T>,
    /// `KL(Q_{i+1} || Q_i)` on the particle support.
    pub kl: Vec<T>,
    pub final_ensemble: ParticleEnsemble<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace<T> {
    pub algorithm: AlgorithmId,
    /// `loss(h_i, z_i)`, thresholded.
    pub instant_loss: Vec<T>,
    pub avg_cum_loss: Vec<T>,
    /// The predictor `h_i` played at step `i`.
    pub predictors: Vec<Vec<T>>,
    /// Largest unclipped loss seen; above `K` means clipping was active.
    pub max_raw_loss: T,
    pub opbd: Option<OpbdDiagnostics<T>>,
    pub gibbs: Option<GibbsDiagnostics<T>>,
}

impl<T: Scalar> RunTrace<T> {
    pub fn new(
        algorithm: AlgorithmId,
        instant_loss: Vec<T>,
        predictors: Vec<Vec<T>>,
        max_raw_loss: T,
    ) -> Self {
        let avg_cum_loss = running_average(&instant_loss);
        Self {
            algorithm,
            instant_loss,
            avg_cum_loss,
            predictors,
            max_raw_loss,
            opbd: None,
            gibbs: None,
        }
    }

    pub fn len(&self) -> usize {
        self.instant_loss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instant_loss.is_empty()
    }

    pub fn predictor_norms(&self) -> Vec<T> {
        self.predictors.iter().map(|h| norm(h)).collect()
    }

    pub fn cumulative_loss(&self) -> T {
        self.instant_loss.iter().copied().sum()
    }

    /// Averaged cumulative loss at 1-based step `t`.
    pub fn avg_at(&self, t: usize) -> Option<T> {
        t.checked_sub(1).and_then(|i| self.avg_cum_loss.get(i).copied())
    }

    /// The same run scored with the test-mode draws `w_i + eps_i`, for
    /// disintegrated runs.
    pub fn test_mode(&self) -> Option<RunTrace<T>> {
        let d = self.opbd.as_ref()?;
        Some(RunTrace::new(
            self.algorithm,
            d.test_losses.clone(),
            d.test_predictors.clone(),
            self.max_raw_loss,
        ))
    }
}
