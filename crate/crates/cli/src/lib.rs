//! Experiment runner for the online PAC-Bayes learners.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

pub use commands::{
    error_bar_table, mean_std, run_bounds_report, run_coverage, run_error_bars, run_single, ErrorBars, Report,
};
pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    Run,
    ErrorBars,
    Bounds,
    Coverage,
}

pub fn execute(verb: Verb, cfg: &ExperimentConfig) -> CliResult<Report> {
    match verb {
        Verb::Run => run_single(cfg),
        Verb::ErrorBars => run_error_bars(cfg),
        Verb::Bounds => run_bounds_report(cfg),
        Verb::Coverage => run_coverage(cfg),
    }
}

/// Loads the config, applies command-line overrides, runs the verb and
/// writes its files. Returns the report and the files written.
pub fn execute_from_file(
    verb: Verb,
    config: &std::path::Path,
    seed: Option<u64>,
    out: Option<PathBuf>,
    overrides: &[String],
) -> CliResult<(Report, Vec<PathBuf>)> {
    let mut cfg = ExperimentConfig::load(config, overrides)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    let report = execute(verb, &cfg)?;
    let written = report.outputs.commit(&cfg.output_dir)?;
    Ok((report, written))
}
