//! Fixed-variance Gaussians, the Laplace prior, particle ensembles for Gibbs
//! posteriors and closed-form divergences between fixed-variance Gaussians.

mod divergence;
mod ensemble;
mod gaussian;

pub use divergence::{disintegrated_log_ratio, kl_gaussian_fixed_var, renyi2_gaussian_fixed_var};
pub use ensemble::{gibbs_update, ParticleEnsemble, WeightSampler};
pub use gaussian::{GaussianFixedVar, LaplacePrior, Prior};
