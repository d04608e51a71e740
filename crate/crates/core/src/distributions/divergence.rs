//! Closed forms for `N(w1, s2 I)` against `N(w2, s2 I)`.

use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::vector::{check_dim, dist_sq};

fn check_variance<T: Scalar>(variance: T) -> Result<()> {
    if variance > T::zero() && variance.is_finite() {
        Ok(())
    } else {
        Err(invalid("variance", "must be positive and finite"))
    }
}

/// `KL = ||w1 - w2||^2 / (2 s2)`.
pub fn kl_gaussian_fixed_var<T: Scalar>(w1: &[T], w2: &[T], variance: T) -> Result<T> {
    check_dim(w1.len(), w2.len())?;
    check_variance(variance)?;
    Ok(dist_sq(w1, w2) / (variance + variance))
}

/// Renyi divergence of order two, `||w1 - w2||^2 / s2`.
pub fn renyi2_gaussian_fixed_var<T: Scalar>(w1: &[T], w2: &[T], variance: T) -> Result<T> {
    check_dim(w1.len(), w2.len())?;
    check_variance(variance)?;
    Ok(dist_sq(w1, w2) / variance)
}

/// Log density ratio `log dN(w1)/dN(w2) (h) = (||h - w2||^2 - ||h - w1||^2) / (2 s2)`.
pub fn disintegrated_log_ratio<T: Scalar>(h: &[T], w1: &[T], w2: &[T], variance: T) -> Result<T> {
    check_dim(w1.len(), w2.len())?;
    check_dim(w1.len(), h.len())?;
    check_variance(variance)?;
    Ok((dist_sq(h, w2) - dist_sq(h, w1)) / (variance + variance))
}
