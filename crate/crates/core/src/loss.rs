//! Hinge and squared losses: thresholded evaluation, subgradients and the
//! exact proximal operator of the unclipped loss.

use serde::{Deserialize, Serialize};

use crate::data::DataPoint;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::vector::{add_scaled, check_dim, dot, norm_sq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossFamily {
    /// `(1 - y <h, x>)_+`
    Hinge,
    /// `(y - <h, x>)^2`
    Squared,
}

impl LossFamily {
    /// Threshold used when none is configured: large enough that clipping is
    /// inactive on standardized data.
    pub fn default_threshold(self) -> f64 {
        match self {
            LossFamily::Hinge => 10.0,
            LossFamily::Squared => 100.0,
        }
    }
}

/// A loss family together with the bound `K` on reported values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LossSpec<T: Scalar> {
    pub family: LossFamily,
    pub threshold: T,
}

impl<T: Scalar> LossSpec<T> {
    pub fn new(family: LossFamily, threshold: T) -> Result<Self> {
        if !(threshold > T::zero()) || !threshold.is_finite() {
            return Err(invalid("threshold", "K must be positive and finite"));
        }
        Ok(Self { family, threshold })
    }

    pub fn with_default_threshold(family: LossFamily) -> Self {
        Self {
            family,
            threshold: T::lit(family.default_threshold()),
        }
    }

    pub fn hinge(threshold: T) -> Result<Self> {
        Self::new(LossFamily::Hinge, threshold)
    }

    pub fn squared(threshold: T) -> Result<Self> {
        Self::new(LossFamily::Squared, threshold)
    }

    /// Unclipped convex loss. The caller guarantees matching dimensions.
    #[inline]
    pub fn raw_unchecked(&self, h: &[T], z: &DataPoint<T>) -> T {
        let score = dot(h, &z.x);
        match self.family {
            LossFamily::Hinge => (T::one() - z.y * score).max(T::zero()),
            LossFamily::Squared => {
                let r = z.y - score;
                r * r
            }
        }
    }

    pub fn raw(&self, h: &[T], z: &DataPoint<T>) -> Result<T> {
        check_dim(z.dim(), h.len())?;
        Ok(self.raw_unchecked(h, z))
    }

    /// Reported loss `min(raw, K)`, always in `[0, K]`.
    #[inline]
    pub fn eval_unchecked(&self, h: &[T], z: &DataPoint<T>) -> T {
        self.raw_unchecked(h, z).min(self.threshold)
    }

    pub fn eval(&self, h: &[T], z: &DataPoint<T>) -> Result<T> {
        check_dim(z.dim(), h.len())?;
        Ok(self.eval_unchecked(h, z))
    }

    /// Subgradient of the unclipped loss, zero on the clipped plateau
    /// `raw > K`. At the hinge kink the active-side element `-y x` is used.
    pub fn subgradient(&self, h: &[T], z: &DataPoint<T>) -> Result<Vec<T>> {
        check_dim(z.dim(), h.len())?;
        let zero = vec![T::zero(); h.len()];
        if self.raw_unchecked(h, z) > self.threshold {
            return Ok(zero);
        }
        let score = dot(h, &z.x);
        let grad = match self.family {
            LossFamily::Hinge => {
                if T::one() - z.y * score < T::zero() {
                    zero
                } else {
                    z.x.iter().map(|&xi| -z.y * xi).collect()
                }
            }
            LossFamily::Squared => {
                let coef = -(T::one() + T::one()) * (z.y - score);
                z.x.iter().map(|&xi| coef * xi).collect()
            }
        };
        Ok(grad)
    }

    /// `argmin_u raw(u, z) + ||u - v||^2 / (2 tau)`, in closed form.
    pub fn prox(&self, z: &DataPoint<T>, v: &[T], tau: T) -> Result<Vec<T>> {
        check_dim(z.dim(), v.len())?;
        if !(tau > T::zero()) {
            return Err(invalid("tau", "proximal step must be positive"));
        }
        let score = dot(v, &z.x);
        let xx = norm_sq(&z.x);
        let u = match self.family {
            LossFamily::Hinge => {
                let gap = T::one() - z.y * score;
                let curvature = z.y * z.y * xx;
                if gap <= T::zero() || curvature == T::zero() {
                    v.to_vec()
                } else {
                    let step = tau.min(gap / curvature);
                    add_scaled(v, step * z.y, &z.x)
                }
            }
            LossFamily::Squared => {
                let two_tau = (T::one() + T::one()) * tau;
                let coef = two_tau * (z.y - score) / (T::one() + two_tau * xx);
                add_scaled(v, coef, &z.x)
            }
        };
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: &[f64], y: f64) -> DataPoint<f64> {
        DataPoint::new(x.to_vec(), y)
    }

    #[test]
    fn eval_examples() {
        let hinge = LossSpec::hinge(10.0).unwrap();
        assert_eq!(hinge.eval(&[0.0], &pt(&[1.0], 1.0)).unwrap(), 1.0);
        let sq = LossSpec::squared(10.0).unwrap();
        assert_eq!(sq.eval(&[1.0], &pt(&[1.0], 1.0)).unwrap(), 0.0);
        let clipped = LossSpec::hinge(0.5).unwrap();
        assert_eq!(clipped.eval(&[0.0], &pt(&[1.0], 1.0)).unwrap(), 0.5);
    }

    #[test]
    fn eval_dimension_mismatch() {
        let sq = LossSpec::squared(10.0).unwrap();
        assert!(sq.eval(&[0.0, 1.0], &pt(&[1.0], 1.0)).is_err());
        assert!(sq.subgradient(&[0.0, 1.0], &pt(&[1.0], 1.0)).is_err());
        assert!(sq.prox(&pt(&[1.0], 1.0), &[0.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn threshold_must_be_positive() {
        assert!(LossSpec::<f64>::hinge(0.0).is_err());
        assert!(LossSpec::<f64>::squared(-1.0).is_err());
        assert!(LossSpec::<f64>::squared(f64::INFINITY).is_err());
    }

    #[test]
    fn subgradient_examples() {
        let hinge = LossSpec::hinge(10.0).unwrap();
        assert_eq!(hinge.subgradient(&[2.0], &pt(&[1.0], 1.0)).unwrap(), vec![0.0]);
        let sq = LossSpec::squared(10.0).unwrap();
        assert_eq!(sq.subgradient(&[0.0], &pt(&[1.0], 1.0)).unwrap(), vec![-2.0]);
        let hinge = LossSpec::hinge(1e6).unwrap();
        assert_eq!(
            hinge.subgradient(&[0.0, 0.0], &pt(&[1.0, 1.0], 1.0)).unwrap(),
            vec![-1.0, -1.0]
        );
    }

    #[test]
    fn subgradient_kink_and_plateau() {
        let hinge = LossSpec::hinge(10.0).unwrap();
        // margin exactly one
        assert_eq!(hinge.subgradient(&[1.0], &pt(&[1.0], 1.0)).unwrap(), vec![-1.0]);
        let sq = LossSpec::squared(1.0).unwrap();
        // raw loss 4 > K = 1
        assert_eq!(sq.subgradient(&[0.0], &pt(&[1.0], 2.0)).unwrap(), vec![0.0]);
    }

    #[test]
    fn prox_examples() {
        let hinge = LossSpec::hinge(10.0).unwrap();
        let sq = LossSpec::squared(10.0).unwrap();
        let z = pt(&[1.0], 1.0);
        assert_eq!(hinge.prox(&z, &[0.0], 0.5).unwrap(), vec![0.5]);
        assert_eq!(sq.prox(&z, &[0.0], 0.5).unwrap(), vec![0.5]);
        for tau in [1e-6, 0.5, 3.0, 1e6] {
            assert_eq!(hinge.prox(&z, &[3.0], tau).unwrap(), vec![3.0]);
        }
    }

    #[test]
    fn prox_zero_features_is_identity_for_hinge() {
        let hinge = LossSpec::hinge(10.0).unwrap();
        let z = pt(&[0.0, 0.0], 1.0);
        assert_eq!(hinge.prox(&z, &[0.3, -0.2], 1.0).unwrap(), vec![0.3, -0.2]);
    }

    #[test]
    fn prox_rejects_non_positive_step() {
        let hinge = LossSpec::hinge(10.0).unwrap();
        assert!(hinge.prox(&pt(&[1.0], 1.0), &[0.0], 0.0).is_err());
    }

    #[test]
    fn prox_examples_match_grid_search() {
        // 1-D objectives (1-u)_+ + u^2 and (1-u)^2 + u^2, tau = 0.5.
        let grid = (0..=200_000).map(|i| -1.0 + i as f64 * 1e-5);
        let (mut best_h, mut best_s) = ((f64::INFINITY, 0.0), (f64::INFINITY, 0.0));
        for u in grid {
            let h = (1.0 - u).max(0.0) + u * u;
            let s = (1.0 - u).powi(2) + u * u;
            if h < best_h.0 {
                best_h = (h, u);
            }
            if s < best_s.0 {
                best_s = (s, u);
            }
        }
        assert!((best_h.1 - 0.5).abs() < 1e-5);
        assert!((best_s.1 - 0.5).abs() < 1e-5);
    }

    #[test]
    fn generic_over_f32() {
        let sq = LossSpec::<f32>::squared(10.0).unwrap();
        let z = DataPoint::new(vec![1.0_f32], 1.0);
        assert_eq!(sq.prox(&z, &[0.0], 0.5).unwrap(), vec![0.5_f32]);
    }
}
