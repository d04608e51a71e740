use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{GibbsLearner, OgdLearner, OpbdLearner};
use crate::bounds::{
    naive_bound_rhs, opb_test_rhs, opb_train_rhs, opbd_test_rhs, opbd_train_rhs, optimal_lambda_phi2_test,
    optimal_lambda_test, BoundKind, Phi2Constant, PhiVariant,
};
use crate::config::{AlgorithmId, OpbdVariant, RunConfig};
use crate::error::{invalid, Error, Result};
use crate::rng::{repetition_seed, stream_rng, streams};
use crate::scalar::Scalar;

use super::risk::{conditional_risk, ensemble_risk, RiskEstimate};
use super::stream::SyntheticStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CoverageSpec<T: Scalar> {
    pub stream: SyntheticStream<T>,
    pub run: RunConfig<T>,
    pub bounds: Vec<BoundKind>,
    pub repetitions: usize,
    pub delta: T,
    pub n_mc: usize,
    /// Scale parameter of the test bounds. `None` uses the minimiser of
    /// each bound's rate function. Training bounds always use the
    /// algorithm's own scale parameter.
    #[serde(default)]
    pub test_lambda: Option<T>,
    #[serde(default)]
    pub phi2_constant: Phi2Constant,
}

/// One repetition for one bound.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow<T> {
    pub rep: usize,
    pub lhs: T,
    pub rhs: T,
    /// Accumulated Monte-Carlo standard error of `lhs`.
    pub mc_se: T,
    pub violation: bool,
    pub max_raw: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageResult<T> {
    pub kind: BoundKind,
    pub delta: T,
    pub threshold: T,
    pub rows: Vec<CoverageRow<T>>,
    pub violations: usize,
}

impl<T: Scalar> CoverageResult<T> {
    pub const CSV_HEADER: &'static str = "bound,row,lhs,rhs,mc_se,violation,coverage";

    pub fn repetitions(&self) -> usize {
        self.rows.len()
    }

    pub fn coverage(&self) -> f64 {
        (self.rows.len() - self.violations) as f64 / self.rows.len() as f64
    }

    pub fn envelope(&self) -> f64 {
        coverage_envelope(self.delta.to_f64_lossy(), self.rows.len())
    }

    /// Some played predictor had an unclipped loss above the threshold.
    pub fn precondition_breach(&self) -> bool {
        self.rows.iter().any(|r| r.max_raw > self.threshold)
    }

    pub fn passes(&self) -> bool {
        !self.precondition_breach() && self.coverage() >= self.envelope()
    }

    /// One row per repetition followed by a summary row.
    pub fn csv_rows(&self) -> Vec<String> {
        let name = self.kind.name();
        let mut out: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                format!(
                    "{name},{},{},{},{},{},{}",
                    r.rep,
                    r.lhs,
                    r.rhs,
                    r.mc_se,
                    u8::from(r.violation),
                    u8::from(!r.violation)
                )
            })
            .collect();
        let n = T::lit(self.rows.len() as f64);
        let mean = |f: fn(&CoverageRow<T>) -> T| self.rows.iter().map(f).sum::<T>() / n;
        out.push(format!(
            "{name},summary,{},{},{},{},{}",
            mean(|r| r.lhs),
            mean(|r| r.rhs),
            mean(|r| r.mc_se),
            self.violations,
            self.coverage()
        ));
        out
    }
}

/// Smallest acceptable coverage: `1 - delta - 3 sqrt(delta (1 - delta) / R)`.
pub fn coverage_envelope(delta: f64, repetitions: usize) -> f64 {
    let r = repetitions.max(1) as f64;
    1.0 - delta - 3.0 * (delta * (1.0 - delta) / r).sqrt()
}

/// Rejects bound/algorithm pairs whose left-hand side the run cannot feed.
pub fn check_compatibility<T: Scalar>(run: &RunConfig<T>, kind: BoundKind) -> Result<()> {
    let ok = match kind {
        BoundKind::OpbTest => matches!(run.algorithm, AlgorithmId::OpbGibbs | AlgorithmId::Ogd),
        BoundKind::OpbTrain | BoundKind::Main | BoundKind::Naive => run.algorithm == AlgorithmId::OpbGibbs,
        BoundKind::OpbdPhi1Test | BoundKind::OpbdPhi2Test => run.algorithm == AlgorithmId::Opbd,
        BoundKind::OpbdPsi1Train => run.algorithm == AlgorithmId::Opbd && run.variant == OpbdVariant::Psi1,
        BoundKind::OpbdPsi2Train => run.algorithm == AlgorithmId::Opbd && run.variant == OpbdVariant::Psi2,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Incompatible(format!(
            "bound {} cannot be evaluated on a {:?} run",
            kind.name(),
            run.algorithm
        )))
    }
}

#[derive(Default)]
struct Side<T> {
    lhs: Vec<T>,
    se_sq: Vec<T>,
    empirical: Vec<T>,
}

impl<T: Scalar> Side<T> {
    fn push(&mut self, est: RiskEstimate<T>, empirical: T) {
        self.lhs.push(est.mean);
        self.se_sq.push(est.std_error * est.std_error);
        self.empirical.push(empirical);
    }

    fn lhs(&self) -> T {
        self.lhs.iter().copied().sum()
    }

    fn se(&self) -> T {
        self.se_sq.iter().copied().sum::<T>().sqrt()
    }

    fn empirical(&self) -> T {
        self.empirical.iter().copied().sum()
    }
}

struct RunSides<T> {
    test: Side<T>,
    train: Side<T>,
    kl: Vec<T>,
    psi: Vec<T>,
    max_raw: T,
}

fn needs_test(kinds: &[BoundKind]) -> bool {
    kinds.iter().any(|k| {
        matches!(
            k,
            BoundKind::OpbTest | BoundKind::OpbdPhi1Test | BoundKind::OpbdPhi2Test
        )
    })
}

fn needs_train(kinds: &[BoundKind]) -> bool {
    kinds.iter().any(|k| !matches!(k, BoundKind::OpbTest | BoundKind::OpbdPhi1Test | BoundKind::OpbdPhi2Test))
}

fn simulate<T: Scalar>(spec: &CoverageSpec<T>, seed: u64) -> Result<RunSides<T>> {
    let stream = spec.stream.clone().with_seed(seed);
    let data = stream.generate()?;
    let cfg = spec.run.clone().with_seed(seed);
    let mut mc = stream_rng(seed, streams::MONTE_CARLO);
    let mut alg = stream_rng(seed, streams::ALGORITHM);
    let (want_test, want_train) = (needs_test(&spec.bounds), needs_train(&spec.bounds));
    let loss = cfg.loss;
    let mut out = RunSides {
        test: Side::default(),
        train: Side::default(),
        kl: Vec::new(),
        psi: Vec::new(),
        max_raw: T::zero(),
    };
    let points = data.points();
    let prev_of = |i: usize| if i == 0 { None } else { Some(points[i - 1].x.as_slice()) };
    match cfg.algorithm {
        AlgorithmId::OpbGibbs => {
            let mut learner = GibbsLearner::from_config(&cfg, data.dim(), &mut alg)?;
            for (i, z) in points.iter().enumerate() {
                let prev = prev_of(i);
                let before = if want_test {
                    Some(ensemble_risk(learner.ensemble(), &loss, &stream, prev, spec.n_mc, &mut mc)?)
                } else {
                    None
                };
                let step = learner.step(z)?;
                out.max_raw = out.max_raw.max(step.raw_loss);
                if let Some(est) = before {
                    out.test.push(est, step.expected_loss_prior);
                }
                if want_train {
                    let est = ensemble_risk(learner.ensemble(), &loss, &stream, prev, spec.n_mc, &mut mc)?;
                    out.train.push(est, step.expected_loss_posterior);
                    out.kl.push(step.kl);
                }
            }
        }
        AlgorithmId::Ogd => {
            let mut learner = OgdLearner::from_config(&cfg, data.dim())?;
            for (i, z) in points.iter().enumerate() {
                let step = learner.step(z)?;
                out.max_raw = out.max_raw.max(step.raw_loss);
                let est = conditional_risk(&step.predictor, &loss, &stream, prev_of(i), spec.n_mc, &mut mc)?;
                out.test.push(est, step.loss);
            }
        }
        AlgorithmId::Opbd => {
            let mut learner = OpbdLearner::from_config(&cfg, data.dim())?;
            for (i, z) in points.iter().enumerate() {
                let prev = prev_of(i);
                let step = learner.step(z, &mut alg)?;
                if want_test {
                    out.max_raw = out.max_raw.max(step.test_raw_loss);
                    let est = conditional_risk(&step.test_predictor, &loss, &stream, prev, spec.n_mc, &mut mc)?;
                    out.test.push(est, step.test_loss);
                }
                if want_train {
                    out.max_raw = out.max_raw.max(step.update.raw_loss);
                    let est = conditional_risk(&step.update.predictor, &loss, &stream, prev, spec.n_mc, &mut mc)?;
                    out.train.push(est, step.update.loss);
                    out.psi.push(match cfg.variant {
                        OpbdVariant::Psi1 => step.update.psi1,
                        OpbdVariant::Psi2 => step.update.psi2,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Runs repetition `rep` and scores every requested bound on it.
pub fn run_repetition<T: Scalar>(spec: &CoverageSpec<T>, rep: usize) -> Result<Vec<CoverageRow<T>>> {
    let seed = repetition_seed(spec.stream.seed, rep as u64);
    let sides = simulate(spec, seed)?;
    let (m, k, delta) = (spec.stream.m, spec.run.loss.threshold, spec.delta);
    let lambda = spec.run.lambda;
    spec.bounds
        .iter()
        .map(|&kind| {
            let (side, report) = match kind {
                BoundKind::OpbTest => {
                    let l = spec.test_lambda.map_or_else(|| optimal_lambda_test(m, k, delta), Ok)?;
                    (&sides.test, opb_test_rhs(sides.test.empirical(), l, m, k, delta)?)
                }
                BoundKind::OpbdPhi1Test => {
                    let l = spec.test_lambda.map_or_else(|| optimal_lambda_test(m, k, delta), Ok)?;
                    (&sides.test, opbd_test_rhs(PhiVariant::Phi1Test, sides.test.empirical(), l, m, k, delta)?)
                }
                BoundKind::OpbdPhi2Test => {
                    let l = spec.test_lambda.map_or_else(|| optimal_lambda_phi2_test(m, k, delta), Ok)?;
                    (&sides.test, opbd_test_rhs(PhiVariant::Phi2Test, sides.test.empirical(), l, m, k, delta)?)
                }
                BoundKind::OpbTrain | BoundKind::Main => {
                    (&sides.train, opb_train_rhs(sides.train.empirical(), &sides.kl, lambda, m, k, delta)?)
                }
                BoundKind::Naive => {
                    (&sides.train, naive_bound_rhs(sides.train.empirical(), &sides.kl, lambda, m, k, delta)?)
                }
                BoundKind::OpbdPsi1Train | BoundKind::OpbdPsi2Train => (
                    &sides.train,
                    opbd_train_rhs(
                        spec.run.variant,
                        sides.train.empirical(),
                        &sides.psi,
                        lambda,
                        m,
                        k,
                        delta,
                        spec.phi2_constant,
                    )?,
                ),
            };
            let lhs = side.lhs();
            let mc_se = side.se();
            Ok(CoverageRow {
                rep,
                lhs,
                rhs: report.total,
                mc_se,
                violation: lhs > report.total + T::lit(3.0) * mc_se,
                max_raw: sides.max_raw,
            })
        })
        .collect()
}

/// Repeats the run on `R` fresh streams and counts violations of each bound.
/// Repetitions run in parallel; results do not depend on scheduling.
pub fn coverage_experiment<T: Scalar>(spec: &CoverageSpec<T>) -> Result<Vec<CoverageResult<T>>> {
    if spec.repetitions == 0 {
        return Err(invalid("repetitions", "must be at least 1"));
    }
    if spec.n_mc == 0 {
        return Err(invalid("n_mc", "must be at least 1"));
    }
    if spec.bounds.is_empty() {
        return Err(invalid("bounds", "at least one bound is required"));
    }
    if !(spec.delta > T::zero() && spec.delta < T::one()) {
        return Err(invalid("delta", "must lie in (0, 1)"));
    }
    spec.stream.validate()?;
    spec.run.validate()?;
    for &kind in &spec.bounds {
        check_compatibility(&spec.run, kind)?;
    }
    let per_rep: Vec<Vec<CoverageRow<T>>> = (0..spec.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(spec, rep))
        .collect::<Result<_>>()?;
    Ok(spec
        .bounds
        .iter()
        .enumerate()
        .map(|(b, &kind)| {
            let rows: Vec<CoverageRow<T>> = per_rep.iter().map(|r| r[b].clone()).collect();
            let violations = rows.iter().filter(|r| r.violation).count();
            CoverageResult {
                kind,
                delta: spec.delta,
                threshold: spec.run.loss.threshold,
                rows,
                violations,
            }
        })
        .collect())
}
