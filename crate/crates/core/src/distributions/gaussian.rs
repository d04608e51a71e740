use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::vector::all_finite;

/// `N(mean, variance * I_d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFixedVar<T> {
    mean: Vec<T>,
    variance: T,
}

impl<T: Scalar> GaussianFixedVar<T> {
    pub fn new(mean: Vec<T>, variance: T) -> Result<Self> {
        if !(variance > T::zero()) || !variance.is_finite() {
            return Err(invalid("variance", "must be positive and finite"));
        }
        if mean.is_empty() {
            return Err(invalid("mean", "dimension must be at least one"));
        }
        if !all_finite(&mean) {
            return Err(Error::InvalidData("non-finite Gaussian mean".into()));
        }
        Ok(Self { mean, variance })
    }

    /// Centered Gaussian with standard deviation `sigma` per coordinate.
    pub fn centered(dim: usize, sigma: T) -> Result<Self> {
        Self::new(vec![T::zero(); dim], sigma * sigma)
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn variance(&self) -> T {
        self.variance
    }

    pub fn std_dev(&self) -> T {
        self.variance.sqrt()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `mean + sigma * xi` with `xi` standard normal per coordinate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let sd = self.std_dev();
        self.mean
            .iter()
            .map(|&m| m + sd * T::sample_standard_normal(rng))
            .collect()
    }

    /// A draw of `N(0, variance * I_d)`.
    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let sd = self.std_dev();
        (0..self.dim())
            .map(|_| sd * T::sample_standard_normal(rng))
            .collect()
    }
}

/// Iid standard Laplace coordinates (location 0, scale 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LaplacePrior {
    dim: usize,
}

impl LaplacePrior {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "dimension must be at least one"));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sample<T: Scalar, R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        (0..self.dim).map(|_| T::sample_standard_laplace(rng)).collect()
    }
}

/// A data-free prior a Gibbs ensemble can be initialised from.
#[derive(Debug, Clone, PartialEq)]
pub enum Prior<T> {
    Gaussian(GaussianFixedVar<T>),
    Laplace(LaplacePrior),
}

impl<T: Scalar> Prior<T> {
    pub fn dim(&self) -> usize {
        match self {
            Prior::Gaussian(g) => g.dim(),
            Prior::Laplace(l) => l.dim(),
        }
    }

    pub fn mean(&self) -> Vec<T> {
        match self {
            Prior::Gaussian(g) => g.mean().to_vec(),
            Prior::Laplace(l) => vec![T::zero(); l.dim()],
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        match self {
            Prior::Gaussian(g) => g.sample(rng),
            Prior::Laplace(l) => l.sample(rng),
        }
    }
}
