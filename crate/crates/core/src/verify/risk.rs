use rand::Rng;

use crate::data::DataPoint;
use crate::distributions::ParticleEnsemble;
use crate::error::{invalid, Result};
use crate::loss::LossSpec;
use crate::scalar::Scalar;
use crate::vector::{check_dim, dist_sq};

use super::stream::SyntheticStream;

/// Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskEstimate<T> {
    pub mean: T,
    pub std_error: T,
    pub samples: usize,
    /// Largest unclipped loss among the draws.
    pub max_raw: T,
}

struct Moments<T> {
    n: usize,
    sum: T,
    sum_sq: T,
    max_raw: T,
}

impl<T: Scalar> Moments<T> {
    fn new() -> Self {
        Self {
            n: 0,
            sum: T::zero(),
            sum_sq: T::zero(),
            max_raw: T::zero(),
        }
    }

    fn push(&mut self, raw: T, k: T) {
        let v = raw.min(k);
        self.n += 1;
        self.sum = self.sum + v;
        self.sum_sq = self.sum_sq + v * v;
        self.max_raw = self.max_raw.max(raw);
    }

    fn finish(self) -> RiskEstimate<T> {
        let n = T::lit(self.n as f64);
        let mean = self.sum / n;
        let std_error = if self.n > 1 {
            let var = ((self.sum_sq - n * mean * mean) / (n - T::one())).max(T::zero());
            (var / n).sqrt()
        } else {
            T::zero()
        };
        RiskEstimate {
            mean,
            std_error,
            samples: self.n,
            max_raw: self.max_raw,
        }
    }
}

fn check_n(n_mc: usize) -> Result<()> {
    if n_mc == 0 {
        return Err(invalid("n_mc", "must be at least 1"));
    }
    Ok(())
}

/// `E[loss(h, z) | past]` by averaging over fresh draws of `z` from the
/// stream's conditional law. `prev` is the feature vector of `z_{i-1}`.
pub fn conditional_risk<T: Scalar, R: Rng + ?Sized>(
    h: &[T],
    loss: &LossSpec<T>,
    stream: &SyntheticStream<T>,
    prev: Option<&[T]>,
    n_mc: usize,
    rng: &mut R,
) -> Result<RiskEstimate<T>> {
    posterior_risk(|_| h, loss, stream, prev, n_mc, rng)
}

/// `E_{h ~ Q} E[loss(h, z) | past]`, sampling `(h, z)` jointly.
pub fn posterior_risk<'a, T: Scalar, R: Rng + ?Sized, F>(
    mut sample_h: F,
    loss: &LossSpec<T>,
    stream: &SyntheticStream<T>,
    prev: Option<&[T]>,
    n_mc: usize,
    rng: &mut R,
) -> Result<RiskEstimate<T>>
where
    F: FnMut(&mut R) -> &'a [T],
{
    check_n(n_mc)?;
    let w = stream.truth();
    let mut acc = Moments::new();
    for _ in 0..n_mc {
        let h = sample_h(rng);
        check_dim(stream.dim, h.len())?;
        let z: DataPoint<T> = stream.sample_point(&w, prev, rng);
        acc.push(loss.raw_unchecked(h, &z), loss.threshold);
    }
    Ok(acc.finish())
}

/// Risk of a particle ensemble, drawing particles by weight.
pub fn ensemble_risk<T: Scalar, R: Rng + ?Sized>(
    ensemble: &ParticleEnsemble<T>,
    loss: &LossSpec<T>,
    stream: &SyntheticStream<T>,
    prev: Option<&[T]>,
    n_mc: usize,
    rng: &mut R,
) -> Result<RiskEstimate<T>> {
    let sampler = ensemble.sampler()?;
    let particles = ensemble.particles();
    posterior_risk(|r| particles[sampler.sample(r)].as_slice(), loss, stream, prev, n_mc, rng)
}

/// Risk of `N(mean, sigma_sq I)`.
pub fn gaussian_risk<T: Scalar, R: Rng + ?Sized>(
    mean: &[T],
    sigma_sq: T,
    loss: &LossSpec<T>,
    stream: &SyntheticStream<T>,
    prev: Option<&[T]>,
    n_mc: usize,
    rng: &mut R,
) -> Result<RiskEstimate<T>> {
    check_n(n_mc)?;
    check_dim(stream.dim, mean.len())?;
    let sd = sigma_sq.sqrt();
    let w = stream.truth();
    let mut acc = Moments::new();
    let mut h = vec![T::zero(); mean.len()];
    for _ in 0..n_mc {
        for (hj, &mj) in h.iter_mut().zip(mean) {
            *hj = mj + sd * T::sample_standard_normal(rng);
        }
        let z = stream.sample_point(&w, prev, rng);
        acc.push(loss.raw_unchecked(&h, &z), loss.threshold);
    }
    Ok(acc.finish())
}

/// Unclipped squared-loss risk on the iid Gaussian linear family:
/// `||h - w*||^2 + s^2`.
pub fn gaussian_linear_risk<T: Scalar>(h: &[T], truth: &[T], noise: T) -> Result<T> {
    check_dim(truth.len(), h.len())?;
    Ok(dist_sq(h, truth) + noise * noise)
}
