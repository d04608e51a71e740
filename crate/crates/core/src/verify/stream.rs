use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{DataPoint, Dataset, Task};
use crate::error::{invalid, Error, Result};
use crate::rng::{stream_rng, streams};
use crate::scalar::Scalar;
use crate::vector::dot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamFamily {
    /// `x ~ N(0, I)`, `y = <w*, x> + noise * N(0, 1)`
    IidGaussianLinear,
    /// `x ~ N(0, I)`, `y = sign(<w*, x>)` flipped with probability `noise`
    IidClassificationMargin,
    /// `x_i = rho x_{i-1} + sqrt(1 - rho^2) xi_i` started at stationarity,
    /// `y` as in the Gaussian linear family
    MarkovAr1,
}

fn default_rho<T: Scalar>() -> T {
    T::lit(0.5)
}

/// A data law the harness can integrate against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SyntheticStream<T: Scalar> {
    pub family: StreamFamily,
    pub dim: usize,
    pub noise: T,
    pub m: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_rho")]
    pub rho: T,
    /// True parameter; defaults to alternating `±1/sqrt(d)`.
    #[serde(default)]
    pub weights: Option<Vec<T>>,
}

impl<T: Scalar> SyntheticStream<T> {
    pub fn new(family: StreamFamily, dim: usize, noise: T, m: usize, seed: u64) -> Result<Self> {
        let s = Self {
            family,
            dim,
            noise,
            m,
            seed,
            rho: default_rho(),
            weights: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_rho(mut self, rho: T) -> Result<Self> {
        self.rho = rho;
        self.validate()?;
        Ok(self)
    }

    pub fn with_weights(mut self, weights: Vec<T>) -> Result<Self> {
        self.weights = Some(weights);
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::EmptyDataset);
        }
        if self.dim == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        if !(self.noise >= T::zero()) || !self.noise.is_finite() {
            return Err(invalid("noise", "must be finite and non-negative"));
        }
        if self.family == StreamFamily::IidClassificationMargin && self.noise > T::lit(0.5) {
            return Err(invalid("noise", "label flip probability must be at most 0.5"));
        }
        if !(self.rho.abs() < T::one()) {
            return Err(invalid("rho", "must lie in (-1, 1)"));
        }
        if let Some(w) = &self.weights {
            if w.len() != self.dim || w.iter().any(|v| !v.is_finite()) {
                return Err(invalid("weights", "must be finite with one entry per feature"));
            }
        }
        Ok(())
    }

    pub fn task(&self) -> Task {
        match self.family {
            StreamFamily::IidClassificationMargin => Task::Classification,
            _ => Task::Regression,
        }
    }

    pub fn truth(&self) -> Vec<T> {
        match &self.weights {
            Some(w) => w.clone(),
            None => {
                let scale = T::one() / T::lit(self.dim as f64).sqrt();
                (0..self.dim).map(|j| if j % 2 == 0 { scale } else { -scale }).collect()
            }
        }
    }

    /// Whether the law of `z_i` depends on the past.
    pub fn is_markov(&self) -> bool {
        self.family == StreamFamily::MarkovAr1
    }

    fn sample_x<R: Rng + ?Sized>(&self, prev: Option<&[T]>, rng: &mut R) -> Vec<T> {
        match (self.family, prev) {
            (StreamFamily::MarkovAr1, Some(p)) => {
                let innov = (T::one() - self.rho * self.rho).sqrt();
                p.iter().map(|&v| self.rho * v + innov * T::sample_standard_normal(rng)).collect()
            }
            _ => (0..self.dim).map(|_| T::sample_standard_normal(rng)).collect(),
        }
    }

    fn label<R: Rng + ?Sized>(&self, w: &[T], x: &[T], rng: &mut R) -> T {
        let s = dot(w, x);
        match self.family {
            StreamFamily::IidClassificationMargin => {
                let y = if s >= T::zero() { T::one() } else { -T::one() };
                if T::lit(rng.random::<f64>()) < self.noise {
                    -y
                } else {
                    y
                }
            }
            _ => s + self.noise * T::sample_standard_normal(rng),
        }
    }

    /// Draws `z_i` from its law given the previous feature vector.
    pub fn sample_point<R: Rng + ?Sized>(&self, w: &[T], prev: Option<&[T]>, rng: &mut R) -> DataPoint<T> {
        let x = self.sample_x(prev, rng);
        let y = self.label(w, &x, rng);
        DataPoint::new(x, y)
    }

    /// Materialises the stream; the same spec always gives the same data.
    pub fn generate(&self) -> Result<Dataset<T>> {
        self.validate()?;
        let mut rng = stream_rng(self.seed, streams::DATA);
        let w = self.truth();
        let mut points: Vec<DataPoint<T>> = Vec::with_capacity(self.m);
        for _ in 0..self.m {
            let prev = points.last().map(|p| p.x.as_slice());
            let z = self.sample_point(&w, prev, &mut rng);
            points.push(z);
        }
        Dataset::new(points, self.task())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_validated() {
        let s = SyntheticStream::new(StreamFamily::MarkovAr1, 3, 0.1_f64, 50, 9).unwrap();
        assert_eq!(s.generate().unwrap(), s.generate().unwrap());
        assert_ne!(s.generate().unwrap(), s.clone().with_seed(10).generate().unwrap());
        assert!(SyntheticStream::new(StreamFamily::IidGaussianLinear, 3, 0.1_f64, 0, 9).is_err());
        assert!(SyntheticStream::new(StreamFamily::IidClassificationMargin, 3, 0.6_f64, 5, 9).is_err());
        assert!(s.with_rho(1.0).is_err());
    }

    #[test]
    fn classification_labels() {
        let s = SyntheticStream::new(StreamFamily::IidClassificationMargin, 2, 0.0_f64, 200, 1).unwrap();
        let d = s.generate().unwrap();
        let w = s.truth();
        assert!(d.iter().all(|z| (z.y > 0.0) == (dot(&w, &z.x) >= 0.0)));
        assert_eq!(d.task(), Task::Classification);
    }

    #[test]
    fn ar1_stationary_moments() {
        let s = SyntheticStream::new(StreamFamily::MarkovAr1, 1, 0.0_f64, 40_000, 2)
            .unwrap()
            .with_rho(0.8)
            .unwrap();
        let d = s.generate().unwrap();
        let xs: Vec<f64> = d.iter().map(|z| z.x[0]).collect();
        let n = xs.len() as f64;
        let var = xs.iter().map(|v| v * v).sum::<f64>() / n;
        let lag = xs.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (n - 1.0);
        assert!((var - 1.0).abs() < 0.05, "{var}");
        assert!((lag / var - 0.8).abs() < 0.02, "{lag}");
    }
}
