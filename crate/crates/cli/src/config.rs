//! Experiment configuration: one JSON document per experiment.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use opb_core::bounds::{BoundKind, Phi2Constant};
use opb_core::dataio::DatasetSpec;
use opb_core::verify::SyntheticStream;
use opb_core::{LossFamily, LossSpec64, PriorMeanRule, RunConfig64, Task};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Ogd,
    GibbsGaussian,
    GibbsLaplace,
    OpbdPsi1,
    OpbdPsi2,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Ogd => "ogd",
            Preset::GibbsGaussian => "gibbs_gaussian",
            Preset::GibbsLaplace => "gibbs_laplace",
            Preset::OpbdPsi1 => "opbd_psi1",
            Preset::OpbdPsi2 => "opbd_psi2",
        }
    }
}

/// One learner. Unset fields take the preset's default for the stream length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmEntry {
    pub algorithm: Preset,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub particles: Option<usize>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub prior_mean: Option<PriorMeanRule<f64>>,
    /// Bounds evaluated on this learner; falls back to the top-level list.
    #[serde(default)]
    pub bounds: Option<Vec<BoundKind>>,
}

impl AlgorithmEntry {
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.algorithm.name().to_owned())
    }

    pub fn resolve(&self, m: usize, loss: LossSpec64, seed: u64) -> CliResult<RunConfig64> {
        let mut cfg = match self.algorithm {
            Preset::Ogd => RunConfig64::ogd(m, loss),
            Preset::GibbsGaussian => RunConfig64::gibbs_gaussian(m, loss),
            Preset::GibbsLaplace => RunConfig64::gibbs_laplace(m, loss),
            Preset::OpbdPsi1 => RunConfig64::opbd_psi1(m, loss),
            Preset::OpbdPsi2 => RunConfig64::opbd_psi2(m, loss),
        };
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.sigma {
            cfg.sigma = v;
        }
        if let Some(v) = self.particles {
            cfg.particles = v;
        }
        if let Some(v) = self.eta {
            cfg.eta = v;
        }
        if self.radius.is_some() {
            cfg.radius = self.radius;
        }
        if let Some(v) = self.prior_mean {
            cfg.prior_mean = v;
        }
        cfg.seed = seed;
        cfg.validate()
            .map_err(|e| CliError::Config(format!("algorithm `{}`: {e}", self.label())))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    pub family: LossFamily,
    /// Defaults to 10 for the hinge loss and 100 for the squared loss.
    #[serde(default)]
    pub threshold: Option<f64>,
}

fn default_cov_reps() -> usize {
    200
}

fn default_n_mc() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSettings {
    #[serde(default = "default_cov_reps")]
    pub repetitions: usize,
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    #[serde(default)]
    pub test_lambda: Option<f64>,
}

impl Default for CoverageSettings {
    fn default() -> Self {
        Self {
            repetitions: default_cov_reps(),
            n_mc: default_n_mc(),
            test_lambda: None,
        }
    }
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_reps() -> usize {
    50
}

fn default_delta() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub dataset: Option<DatasetSpec>,
    #[serde(default)]
    pub synthetic: Option<SyntheticStream<f64>>,
    /// Defaults to hinge for classification and squared for regression.
    #[serde(default)]
    pub loss: Option<LossConfig>,
    pub algorithms: Vec<AlgorithmEntry>,
    /// 1-based steps of the error-bar table; five evenly spaced by default.
    #[serde(default)]
    pub checkpoints: Option<Vec<usize>>,
    /// Seeds per learner in the error-bar table.
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub bounds: Option<Vec<BoundKind>>,
    #[serde(default)]
    pub lambda_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub phi2_constant: Phi2Constant,
    #[serde(default)]
    pub coverage: CoverageSettings,
}

/// Sets `path` (dot separated, numeric segments index arrays) to `raw`,
/// parsed as JSON when possible and as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> CliResult<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not key=value")))?;
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(CliError::Config(format!("override key `{path}` is malformed")));
    }
    let mut cur = doc;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert((*seg).to_owned(), value);
                    return Ok(());
                }
                map.entry((*seg).to_owned())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| CliError::Config(format!("override key `{path}`: `{seg}` is not an index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| CliError::Config(format!("override key `{path}`: index {idx} out of {len}")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(CliError::Config(format!("override key `{path}` descends into a scalar"))),
        };
    }
    unreachable!("the loop returns on the last segment")
}

impl ExperimentConfig {
    /// Reads the file, applies overrides in order, and resolves relative
    /// dataset paths against the config file's directory.
    pub fn load(path: &Path, overrides: &[String]) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut doc: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let mut cfg: Self =
            serde_json::from_value(doc).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        if let Some(ds) = cfg.dataset.as_mut() {
            if ds.path.is_relative() {
                ds.path = base.join(&ds.path);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.algorithms.is_empty() {
            return Err(CliError::Config("at least one algorithm entry is required".into()));
        }
        let mut names = BTreeSet::new();
        for a in &self.algorithms {
            let label = a.label();
            if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(CliError::Config(format!("algorithm name `{label}` must be [A-Za-z0-9_-]+")));
            }
            if !names.insert(label.clone()) {
                return Err(CliError::Config(format!("duplicate algorithm name `{label}`")));
            }
        }
        match (&self.dataset, &self.synthetic) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either `dataset` or `synthetic`, not both".into())),
            (None, None) => return Err(CliError::Config("one of `dataset` or `synthetic` is required".into())),
            _ => {}
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(CliError::Config("delta must lie in (0, 1)".into()));
        }
        if let Some(g) = &self.lambda_grid {
            if g.is_empty() || g.iter().any(|l| !l.is_finite() || *l <= 0.0) {
                return Err(CliError::Config("lambda_grid must be non-empty and positive".into()));
            }
        }
        if let Some(s) = &self.synthetic {
            s.validate().map_err(|e| CliError::Config(format!("synthetic: {e}")))?;
        }
        Ok(())
    }

    pub fn task(&self) -> Task {
        match (&self.dataset, &self.synthetic) {
            (Some(d), _) => d.task,
            (_, Some(s)) => s.task(),
            _ => Task::Regression,
        }
    }

    pub fn loss(&self) -> CliResult<LossSpec64> {
        let (family, threshold) = match self.loss {
            Some(l) => (l.family, l.threshold),
            None => match self.task() {
                Task::Classification => (LossFamily::Hinge, None),
                Task::Regression => (LossFamily::Squared, None),
            },
        };
        let k = threshold.unwrap_or_else(|| family.default_threshold());
        LossSpec64::new(family, k).map_err(|e| CliError::Config(format!("loss: {e}")))
    }

    /// Explicit checkpoints, or `m/5, 2m/5, ..., m`.
    pub fn checkpoints(&self, m: usize) -> CliResult<Vec<usize>> {
        let cps = match &self.checkpoints {
            Some(c) => c.clone(),
            None => (1..=5).map(|k| (k * m / 5).max(1)).collect(),
        };
        if cps.is_empty() {
            return Err(CliError::Config("checkpoints must not be empty".into()));
        }
        if let Some(bad) = cps.iter().find(|&&t| t == 0 || t > m) {
            return Err(CliError::Config(format!("checkpoint {bad} outside 1..={m}")));
        }
        Ok(cps)
    }
}
