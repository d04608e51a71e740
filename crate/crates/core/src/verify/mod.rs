//! Monte-Carlo checks of the bounds on synthetic streams with a known law.

mod coverage;
mod probe;
mod risk;
mod stream;

pub use coverage::{
    check_compatibility, coverage_envelope, coverage_experiment, run_repetition, CoverageResult, CoverageRow,
    CoverageSpec,
};
pub use probe::{exp_moment_exact, exp_moment_probe, PriorChain, ProbeResult, ProbeSpec};
pub use risk::{conditional_risk, ensemble_risk, gaussian_linear_risk, gaussian_risk, posterior_risk, RiskEstimate};
pub use stream::{StreamFamily, SyntheticStream};
