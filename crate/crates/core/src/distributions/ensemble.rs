//! Fixed particle support with evolving log-weights.
//!
//! Particles are drawn once from the data-free prior. Every Gibbs update adds
//! `-lambda * loss` to each log-weight, so after `m` steps the weight of
//! particle `j` is proportional to `exp(-lambda * sum_i loss(h_j, z_i))`.
//! Normalisation is deferred to the read side (log-sum-exp).

use rand::Rng;

use super::gaussian::Prior;
use crate::data::DataPoint;
use crate::error::{invalid, Error, Result};
use crate::loss::LossSpec;
use crate::scalar::Scalar;
use crate::vector::{all_finite, check_dim, log_sum_exp};

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble<T> {
    particles: Vec<Vec<T>>,
    log_weights: Vec<T>,
}

impl<T: Scalar> ParticleEnsemble<T> {
    pub fn new(particles: Vec<Vec<T>>, log_weights: Vec<T>) -> Result<Self> {
        if particles.is_empty() {
            return Err(invalid("particles", "need at least one particle"));
        }
        if particles.len() != log_weights.len() {
            return Err(Error::DimensionMismatch {
                expected: particles.len(),
                actual: log_weights.len(),
            });
        }
        let dim = particles[0].len();
        for p in &particles {
            check_dim(dim, p.len())?;
            if !all_finite(p) {
                return Err(Error::InvalidData("non-finite particle".into()));
            }
        }
        Ok(Self {
            particles,
            log_weights,
        })
    }

    /// Uniform weights over the given particles.
    pub fn uniform(particles: Vec<Vec<T>>) -> Result<Self> {
        let n = particles.len();
        Self::new(particles, vec![T::zero(); n])
    }

    /// `n` iid draws from `prior`, uniformly weighted.
    pub fn init<R: Rng + ?Sized>(prior: &Prior<T>, n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(invalid("particles", "need at least one particle"));
        }
        let particles = (0..n).map(|_| prior.sample(rng)).collect();
        Self::uniform(particles)
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.particles[0].len()
    }

    pub fn particles(&self) -> &[Vec<T>] {
        &self.particles
    }

    pub fn log_weights(&self) -> &[T] {
        &self.log_weights
    }

    pub fn log_normalizer(&self) -> T {
        log_sum_exp(&self.log_weights)
    }

    fn checked_log_normalizer(&self) -> Result<T> {
        let lse = self.log_normalizer();
        if lse.is_finite() {
            Ok(lse)
        } else {
            Err(Error::EnsembleCollapse)
        }
    }

    /// Normalised log-probabilities `log p_j`.
    pub fn log_probabilities(&self) -> Result<Vec<T>> {
        let lse = self.checked_log_normalizer()?;
        Ok(self.log_weights.iter().map(|&lw| lw - lse).collect())
    }

    /// `softmax(log_weights)`.
    pub fn normalized_weights(&self) -> Result<Vec<T>> {
        Ok(self
            .log_probabilities()?
            .into_iter()
            .map(|lp| lp.exp())
            .collect())
    }

    /// Adds `-lambda * loss_j` to every log-weight, with precomputed
    /// per-particle losses.
    pub fn reweight(&mut self, losses: &[T], lambda: T) -> Result<()> {
        check_dim(self.len(), losses.len())?;
        for (lw, &l) in self.log_weights.iter_mut().zip(losses) {
            *lw = *lw - lambda * l;
        }
        Ok(())
    }

    /// Thresholded loss of every particle on `z`.
    pub fn particle_losses(&self, loss: &LossSpec<T>, z: &DataPoint<T>) -> Result<Vec<T>> {
        check_dim(self.dim(), z.dim())?;
        Ok(self
            .particles
            .iter()
            .map(|h| loss.eval_unchecked(h, z))
            .collect())
    }

    /// In-place Gibbs update on `z`; returns the per-particle losses.
    pub fn gibbs_update(&mut self, loss: &LossSpec<T>, z: &DataPoint<T>, lambda: T) -> Result<Vec<T>> {
        let losses = self.particle_losses(loss, z)?;
        self.reweight(&losses, lambda)?;
        Ok(losses)
    }

    /// Self-normalised weighted average of the particles.
    pub fn posterior_mean(&self) -> Result<Vec<T>> {
        let w = self.normalized_weights()?;
        let mut mean = vec![T::zero(); self.dim()];
        for (p, &wj) in self.particles.iter().zip(&w) {
            for (m, &v) in mean.iter_mut().zip(p) {
                *m = *m + wj * v;
            }
        }
        Ok(mean)
    }

    /// `E_{h ~ Q}[values_j]` for values attached to the particles.
    pub fn expectation(&self, values: &[T]) -> Result<T> {
        check_dim(self.len(), values.len())?;
        let w = self.normalized_weights()?;
        Ok(w.iter().zip(values).map(|(&wj, &v)| wj * v).sum())
    }

    /// `1 / sum_j p_j^2`.
    pub fn effective_sample_size(&self) -> Result<T> {
        let w = self.normalized_weights()?;
        let s: T = w.iter().map(|&p| p * p).sum();
        Ok(T::one() / s)
    }

    /// `KL(self || reference)` between two weightings of the same support.
    pub fn kl_to(&self, reference: &ParticleEnsemble<T>) -> Result<T> {
        check_dim(self.len(), reference.len())?;
        let lp = self.log_probabilities()?;
        let lq = reference.log_probabilities()?;
        let mut kl = T::zero();
        for (&a, &b) in lp.iter().zip(&lq) {
            if a == T::neg_infinity() {
                continue;
            }
            kl = kl + a.exp() * (a - b);
        }
        Ok(kl.max(T::zero()))
    }

    pub fn sampler(&self) -> Result<WeightSampler<T>> {
        WeightSampler::new(&self.normalized_weights()?)
    }
}

/// Inverse-CDF sampler of particle indices.
#[derive(Debug, Clone)]
pub struct WeightSampler<T> {
    cumulative: Vec<T>,
}

impl<T: Scalar> WeightSampler<T> {
    pub fn new(weights: &[T]) -> Result<Self> {
        let mut acc = T::zero();
        let cumulative: Vec<T> = weights
            .iter()
            .map(|&w| {
                acc = acc + w;
                acc
            })
            .collect();
        if cumulative.is_empty() || !(acc > T::zero()) {
            return Err(Error::EnsembleCollapse);
        }
        Ok(Self { cumulative })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty");
        let u = T::lit(rng.random::<f64>()) * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.cumulative.len() - 1)
    }
}

/// Functional form of [`ParticleEnsemble::gibbs_update`].
pub fn gibbs_update<T: Scalar>(
    ensemble: &ParticleEnsemble<T>,
    loss: &LossSpec<T>,
    z: &DataPoint<T>,
    lambda: T,
) -> Result<ParticleEnsemble<T>> {
    let mut next = ensemble.clone();
    next.gibbs_update(loss, z, lambda)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{GaussianFixedVar, LaplacePrior};
    use crate::rng::stream_rng;

    fn ens(particles: &[&[f64]], lw: &[f64]) -> ParticleEnsemble<f64> {
        ParticleEnsemble::new(particles.iter().map(|p| p.to_vec()).collect(), lw.to_vec()).unwrap()
    }

    #[test]
    fn init_single_particle() {
        let prior = Prior::Gaussian(GaussianFixedVar::centered(2, 1.0).unwrap());
        let e = ParticleEnsemble::init(&prior, 1, &mut stream_rng(0, 0)).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e.normalized_weights().unwrap(), vec![1.0]);
        assert!(ParticleEnsemble::init(&prior, 0, &mut stream_rng(0, 0)).is_err());
    }

    fn coordinate_variance(e: &ParticleEnsemble<f64>) -> f64 {
        let n = e.len() as f64;
        let xs: Vec<f64> = e.particles().iter().map(|p| p[0]).collect();
        let mean = xs.iter().sum::<f64>() / n;
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    }

    #[test]
    fn init_gaussian_variance() {
        let prior = Prior::Gaussian(GaussianFixedVar::centered(1, 1.5).unwrap());
        let e = ParticleEnsemble::init(&prior, 1000, &mut stream_rng(3, 0)).unwrap();
        let v = coordinate_variance(&e);
        assert!((v - 2.25).abs() < 0.3, "variance {v}");
    }

    #[test]
    fn init_laplace_variance() {
        let prior: Prior<f64> = Prior::Laplace(LaplacePrior::new(1).unwrap());
        let e = ParticleEnsemble::init(&prior, 1000, &mut stream_rng(4, 0)).unwrap();
        let v = coordinate_variance(&e);
        assert!((v - 2.0).abs() < 0.3, "variance {v}");
    }

    #[test]
    fn gibbs_update_examples() {
        let e = ens(&[&[0.0], &[1.0]], &[0.0, 0.0]);
        let same = e.clone();
        let mut e0 = e.clone();
        e0.reweight(&[3.0, 7.0], 0.0).unwrap();
        assert_eq!(e0, same);

        let mut e1 = e.clone();
        e1.reweight(&[0.0, 1.0], 1.0).unwrap();
        let w = e1.normalized_weights().unwrap();
        assert!((w[0] - 0.731_058_578_630_004_9).abs() < 1e-12);
        assert!((w[1] - 0.268_941_421_369_995_1).abs() < 1e-12);

        let mut e2 = ens(&[&[0.0], &[1.0]], &[0.3, -0.4]);
        let before = e2.log_weights()[0] - e2.log_weights()[1];
        e2.reweight(&[2.0, 2.0], 0.7).unwrap();
        let after = e2.log_weights()[0] - e2.log_weights()[1];
        assert!((before - after).abs() < 1e-15);
    }

    #[test]
    fn posterior_mean_examples() {
        assert_eq!(ens(&[&[0.0], &[2.0]], &[0.0, 0.0]).posterior_mean().unwrap(), vec![1.0]);
        let m = ens(&[&[0.0], &[4.0]], &[0.75f64.ln(), 0.25f64.ln()]).posterior_mean().unwrap();
        assert!((m[0] - 1.0).abs() < 1e-12);
        assert_eq!(ens(&[&[3.0, -1.0]], &[0.0]).posterior_mean().unwrap(), vec![3.0, -1.0]);
        let dead = ens(&[&[0.0], &[1.0]], &[f64::NEG_INFINITY, f64::NEG_INFINITY]);
        assert_eq!(dead.posterior_mean(), Err(Error::EnsembleCollapse));
    }

    #[test]
    fn posterior_mean_survives_extreme_log_weights() {
        let m = ens(&[&[0.0], &[4.0]], &[-1e6 + 0.75f64.ln(), -1e6 + 0.25f64.ln()])
            .posterior_mean()
            .unwrap();
        assert!((m[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ess_examples() {
        let uniform = ParticleEnsemble::uniform(vec![vec![0.0_f64]; 100]).unwrap();
        assert!((uniform.effective_sample_size().unwrap() - 100.0).abs() < 1e-9);
        let mut lw = vec![f64::NEG_INFINITY; 100];
        lw[17] = 0.0;
        let one = ParticleEnsemble::new(vec![vec![0.0_f64]; 100], lw).unwrap();
        assert!((one.effective_sample_size().unwrap() - 1.0).abs() < 1e-12);
        let half = ParticleEnsemble::new(
            vec![vec![0.0_f64]; 4],
            vec![0.0, 0.0, f64::NEG_INFINITY, f64::NEG_INFINITY],
        )
        .unwrap();
        assert!((half.effective_sample_size().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kl_between_weightings() {
        let a = ens(&[&[0.0], &[1.0]], &[0.0, 0.0]);
        assert_eq!(a.kl_to(&a).unwrap(), 0.0);
        let b = ens(&[&[0.0], &[1.0]], &[0.0, -1.0]);
        let p = b.normalized_weights().unwrap();
        let expected = p[0] * (2.0 * p[0]).ln() + p[1] * (2.0 * p[1]).ln();
        assert!((b.kl_to(&a).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn sampler_follows_weights() {
        let s = WeightSampler::new(&[0.25_f64, 0.0, 0.75]).unwrap();
        let mut rng = stream_rng(9, 0);
        let mut counts = [0usize; 3];
        for _ in 0..40_000 {
            counts[s.sample(&mut rng)] += 1;
        }
        assert_eq!(counts[1], 0);
        let frac = counts[2] as f64 / 40_000.0;
        assert!((frac - 0.75).abs() < 0.01);
    }
}
