//! The four verbs. Each returns the files to write and the lines to print;
//! nothing touches the file system except dataset loading.

use rayon::prelude::*;

use opb_core::algorithms::run;
use opb_core::bounds::{
    lambda_grid_select, naive_bound_rhs, opb_test_rhs, opb_train_rhs, opbd_test_rhs, opbd_train_rhs,
    optimal_lambda_phi2_test, optimal_lambda_test, BoundKind, BoundReport, PhiVariant,
};
use opb_core::dataio::load_dataset;
use opb_core::verify::{check_compatibility, coverage_experiment, CoverageResult, CoverageSpec};
use opb_core::{AlgorithmId, Dataset64, OpbdVariant, RunConfig64, RunTrace64};

use crate::config::{AlgorithmEntry, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::output::Outputs;

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Report {
    pub outputs: Outputs,
    /// Printed on stdout.
    pub lines: Vec<String>,
    /// Printed on stderr.
    pub warnings: Vec<String>,
    /// Set when an acceptance or precondition check failed (exit code 3).
    pub flag: Option<String>,
}

impl Report {
    fn raise(&mut self, msg: String) {
        if self.flag.is_none() {
            self.flag = Some(msg);
        }
    }
}

pub fn load_data(cfg: &ExperimentConfig) -> CliResult<Dataset64> {
    match (&cfg.dataset, &cfg.synthetic) {
        (Some(spec), None) => Ok(load_dataset(spec)?),
        (None, Some(stream)) => Ok(stream.clone().with_seed(cfg.seed).generate()?),
        _ => Err(CliError::Config("one of `dataset` or `synthetic` is required".into())),
    }
}

fn resolve_all(cfg: &ExperimentConfig, m: usize, seed: u64) -> CliResult<Vec<(String, RunConfig64)>> {
    let loss = cfg.loss()?;
    cfg.algorithms
        .iter()
        .map(|a| Ok((a.label(), a.resolve(m, loss, seed)?)))
        .collect()
}

fn check_dims(cfg: &ExperimentConfig, data: &Dataset64) -> CliResult<()> {
    let loss = cfg.loss()?;
    if loss.family == opb_core::LossFamily::Hinge && data.task() == opb_core::Task::Regression {
        return Err(CliError::Config("hinge loss needs a classification task".into()));
    }
    Ok(())
}

pub const TRACE_HEADER: &str = "step,instant_loss,avg_cum_loss,predictor_norm";

pub fn trace_rows(trace: &RunTrace64) -> Vec<String> {
    let norms = trace.predictor_norms();
    (0..trace.len())
        .map(|i| format!("{},{},{},{}", i + 1, trace.instant_loss[i], trace.avg_cum_loss[i], norms[i]))
        .collect()
}

/// `run`: one trace per learner plus a whitespace-separated plot file.
pub fn run_single(cfg: &ExperimentConfig) -> CliResult<Report> {
    let data = load_data(cfg)?;
    check_dims(cfg, &data)?;
    let runs = resolve_all(cfg, data.len(), cfg.seed)?;
    let traces: Vec<RunTrace64> = runs
        .par_iter()
        .map(|(_, rc)| run(rc, &data))
        .collect::<opb_core::Result<_>>()?;
    let mut report = Report::default();
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    let k = cfg.loss()?.threshold;
    for ((name, _), trace) in runs.iter().zip(&traces) {
        report.outputs.add_csv(format!("trace_{name}.csv"), TRACE_HEADER, &trace_rows(trace));
        columns.push((name.clone(), trace.avg_cum_loss.clone()));
        report.lines.push(format!(
            "{name}: final averaged cumulative loss {}",
            trace.avg_cum_loss.last().copied().unwrap_or(0.0)
        ));
        if let Some(test) = trace.test_mode() {
            report.outputs.add_csv(format!("trace_{name}_test.csv"), TRACE_HEADER, &trace_rows(&test));
            columns.push((format!("{name}_test"), test.avg_cum_loss.clone()));
        }
        if trace.max_raw_loss > k {
            report.warnings.push(format!(
                "{name}: raw loss {} exceeds the threshold {k}; reported losses are clipped",
                trace.max_raw_loss
            ));
        }
    }
    let mut plot = format!(
        "# step {}\n",
        columns.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(" ")
    );
    for i in 0..data.len() {
        plot.push_str(&(i + 1).to_string());
        for (_, c) in &columns {
            plot.push(' ');
            plot.push_str(&c[i].to_string());
        }
        plot.push('\n');
    }
    report.outputs.add("plot.dat", plot);
    Ok(report)
}

/// Sample mean and unbiased standard deviation. Deviations are taken from
/// the first value so that identical inputs give exactly zero spread.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let x0 = values[0];
    let s: f64 = values.iter().map(|v| v - x0).sum();
    let ss: f64 = values.iter().map(|v| (v - x0) * (v - x0)).sum();
    let var = ((ss - s * s / n) / (n - 1.0)).max(0.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBars {
    pub name: String,
    /// `(checkpoint, mean, std)`
    pub rows: Vec<(usize, f64, f64)>,
}

/// Averaged cumulative loss at each checkpoint over seeds
/// `seed, seed + 1, ..., seed + n - 1`, per learner.
pub fn error_bar_table(
    runs: &[(String, RunConfig64)],
    data: &Dataset64,
    seed: u64,
    n: usize,
    checkpoints: &[usize],
) -> CliResult<Vec<ErrorBars>> {
    let jobs: Vec<(usize, u64)> = (0..runs.len())
        .flat_map(|a| (0..n as u64).map(move |r| (a, r)))
        .collect();
    let values: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(a, r)| {
            let rc = runs[a].1.clone().with_seed(seed.wrapping_add(r));
            let trace = run(&rc, data)?;
            Ok(checkpoints
                .iter()
                .map(|&t| trace.avg_at(t).expect("checkpoint within the stream"))
                .collect())
        })
        .collect::<opb_core::Result<_>>()?;
    Ok(runs
        .iter()
        .enumerate()
        .map(|(a, (name, _))| {
            let per_seed = &values[a * n..(a + 1) * n];
            let rows = checkpoints
                .iter()
                .enumerate()
                .map(|(c, &t)| {
                    let col: Vec<f64> = per_seed.iter().map(|v| v[c]).collect();
                    let (mean, std) = mean_std(&col);
                    (t, mean, std)
                })
                .collect();
            ErrorBars {
                name: name.clone(),
                rows,
            }
        })
        .collect())
}

/// `error-bars`: a `checkpoint,mean,std` table per learner and a combined
/// table with one mean/std column pair per learner.
pub fn run_error_bars(cfg: &ExperimentConfig) -> CliResult<Report> {
    if cfg.repetitions < 2 {
        return Err(CliError::Config("error bars need at least 2 repetitions".into()));
    }
    let data = load_data(cfg)?;
    check_dims(cfg, &data)?;
    let checkpoints = cfg.checkpoints(data.len())?;
    let runs = resolve_all(cfg, data.len(), cfg.seed)?;
    let tables = error_bar_table(&runs, &data, cfg.seed, cfg.repetitions, &checkpoints)?;
    let mut report = Report::default();
    for t in &tables {
        let rows: Vec<String> = t.rows.iter().map(|(c, m, s)| format!("{c},{m},{s}")).collect();
        report.outputs.add_csv(format!("errorbars_{}.csv", t.name), "checkpoint,mean,std", &rows);
    }
    let header = std::iter::once("checkpoint".to_owned())
        .chain(tables.iter().flat_map(|t| [format!("mean_{}", t.name), format!("std_{}", t.name)]))
        .collect::<Vec<_>>()
        .join(",");
    let rows: Vec<String> = checkpoints
        .iter()
        .enumerate()
        .map(|(c, t)| {
            std::iter::once(t.to_string())
                .chain(tables.iter().flat_map(|tb| [tb.rows[c].1.to_string(), tb.rows[c].2.to_string()]))
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    report.lines.push(header.replace(',', "\t"));
    report.lines.extend(rows.iter().map(|r| r.replace(',', "\t")));
    report.outputs.add_csv("errorbars.csv", &header, &rows);
    Ok(report)
}

fn default_bounds(algorithm: AlgorithmId, variant: OpbdVariant) -> Vec<BoundKind> {
    match algorithm {
        AlgorithmId::Ogd => vec![BoundKind::OpbTest],
        AlgorithmId::OpbGibbs => vec![BoundKind::OpbTest, BoundKind::OpbTrain, BoundKind::Main, BoundKind::Naive],
        AlgorithmId::Opbd => vec![
            match variant {
                OpbdVariant::Psi1 => BoundKind::OpbdPsi1Train,
                OpbdVariant::Psi2 => BoundKind::OpbdPsi2Train,
            },
            BoundKind::OpbdPhi1Test,
            BoundKind::OpbdPhi2Test,
        ],
    }
}

fn requested_bounds(cfg: &ExperimentConfig, entry: &AlgorithmEntry, rc: &RunConfig64) -> Option<Vec<BoundKind>> {
    entry.bounds.clone().or_else(|| cfg.bounds.clone()).or_else(|| Some(default_bounds(rc.algorithm, rc.variant)))
}

/// How the scale parameter of a reported bound was chosen.
fn bound_on_run(
    kind: BoundKind,
    rc: &RunConfig64,
    trace: &RunTrace64,
    delta: f64,
    phi2: opb_core::bounds::Phi2Constant,
) -> CliResult<(&'static str, BoundReport<f64>)> {
    let (m, k) = (trace.len(), rc.loss.threshold);
    let gibbs = || {
        trace
            .gibbs
            .as_ref()
            .ok_or_else(|| CliError::Runtime("Gibbs diagnostics missing".into()))
    };
    let opbd = || {
        trace
            .opbd
            .as_ref()
            .ok_or_else(|| CliError::Runtime("OPBD diagnostics missing".into()))
    };
    let sum = |v: &[f64]| v.iter().sum::<f64>();
    Ok(match kind {
        BoundKind::OpbTest => {
            let empirical = match rc.algorithm {
                AlgorithmId::OpbGibbs => sum(&gibbs()?.expected_loss_prior),
                _ => trace.cumulative_loss(),
            };
            ("optimal", opb_test_rhs(empirical, optimal_lambda_test(m, k, delta)?, m, k, delta)?)
        }
        BoundKind::OpbTrain | BoundKind::Main | BoundKind::Naive => {
            let g = gibbs()?;
            let f = match kind {
                BoundKind::Naive => naive_bound_rhs,
                BoundKind::Main => opb_core::bounds::main_bound_rhs,
                _ => opb_train_rhs,
            };
            ("algorithm", f(sum(&g.expected_loss_posterior), &g.kl, rc.lambda, m, k, delta)?)
        }
        BoundKind::OpbdPsi1Train | BoundKind::OpbdPsi2Train => {
            let d = opbd()?;
            let psi = match rc.variant {
                OpbdVariant::Psi1 => &d.psi1,
                OpbdVariant::Psi2 => &d.psi2,
            };
            (
                "algorithm",
                opbd_train_rhs(rc.variant, trace.cumulative_loss(), psi, rc.lambda, m, k, delta, phi2)?,
            )
        }
        BoundKind::OpbdPhi1Test => {
            let d = opbd()?;
            let l = optimal_lambda_test(m, k, delta)?;
            ("optimal", opbd_test_rhs(PhiVariant::Phi1Test, sum(&d.test_losses), l, m, k, delta)?)
        }
        BoundKind::OpbdPhi2Test => {
            let d = opbd()?;
            let l = optimal_lambda_phi2_test(m, k, delta)?;
            ("optimal", opbd_test_rhs(PhiVariant::Phi2Test, sum(&d.test_losses), l, m, k, delta)?)
        }
    })
}

pub const BOUNDS_PREFIX: &str = "algorithm,lambda_rule,bounded";

/// `bounds`: every requested bound evaluated on one run of each learner.
pub fn run_bounds_report(cfg: &ExperimentConfig) -> CliResult<Report> {
    let data = load_data(cfg)?;
    check_dims(cfg, &data)?;
    let runs = resolve_all(cfg, data.len(), cfg.seed)?;
    let mut report = Report::default();
    let mut rows = Vec::new();
    let mut any_match = vec![false; cfg.bounds.as_ref().map_or(0, Vec::len)];
    for ((name, rc), entry) in runs.iter().zip(&cfg.algorithms) {
        let trace = run(rc, &data)?;
        let bounded = trace.max_raw_loss <= rc.loss.threshold;
        if !bounded {
            report.raise(format!(
                "{name}: observed raw loss {} exceeds the threshold {}; the boundedness precondition fails",
                trace.max_raw_loss, rc.loss.threshold
            ));
        }
        let kinds = requested_bounds(cfg, entry, rc).unwrap_or_default();
        let mut main_total = None;
        let mut naive_total = None;
        for kind in kinds {
            if check_compatibility(rc, kind).is_err() {
                if entry.bounds.is_some() {
                    return Err(CliError::Config(format!("bound {} does not apply to `{name}`", kind.name())));
                }
                continue;
            }
            if let Some(pos) = cfg.bounds.as_ref().and_then(|b| b.iter().position(|&x| x == kind)) {
                any_match[pos] = true;
            }
            let (rule, r) = bound_on_run(kind, rc, &trace, cfg.delta, cfg.phi2_constant)?;
            match kind {
                BoundKind::Main => main_total = Some(r.total),
                BoundKind::Naive => naive_total = Some(r.total),
                _ => {}
            }
            rows.push(format!("{name},{rule},{},{}", u8::from(bounded), r.csv_row()));
        }
        if let (Some(mt), Some(nt)) = (main_total, naive_total) {
            report.lines.push(format!("{name}: naive - main = {}", nt - mt));
        }
        if let Some(grid) = &cfg.lambda_grid {
            if matches!(rc.algorithm, AlgorithmId::Ogd | AlgorithmId::OpbGibbs) {
                let (sel, sweep) = grid_sweep(rc, &data, &trace, grid, cfg.delta)?;
                rows.push(format!("{name},grid,{},{}", u8::from(bounded), sel.csv_row()));
                report.outputs.add_csv(
                    format!("lambda_sweep_{name}.csv"),
                    "lambda,empirical,total",
                    &sweep,
                );
                report.lines.push(format!("{name}: grid-selected lambda {} with total {}", sel.lambda, sel.total));
            }
        }
    }
    if let Some(b) = &cfg.bounds {
        if let Some(pos) = any_match.iter().position(|x| !x) {
            return Err(CliError::Config(format!("bound {} applies to none of the learners", b[pos].name())));
        }
    }
    let header = format!("{BOUNDS_PREFIX},{}", BoundReport::<f64>::CSV_HEADER);
    report.lines.push(header.clone());
    report.lines.extend(rows.iter().cloned());
    report.outputs.add_csv("bounds.csv", &header, &rows);
    Ok(report)
}

/// Test bound over a scale grid. For the Gibbs learner the scale is also
/// the learner's own, so the run is repeated for each grid point.
fn grid_sweep(
    rc: &RunConfig64,
    data: &Dataset64,
    trace: &RunTrace64,
    grid: &[f64],
    delta: f64,
) -> CliResult<(BoundReport<f64>, Vec<String>)> {
    let (m, k) = (data.len(), rc.loss.threshold);
    let empirical: Vec<f64> = match rc.algorithm {
        AlgorithmId::OpbGibbs => grid
            .par_iter()
            .map(|&l| {
                let mut c = rc.clone();
                c.lambda = l;
                let t = run(&c, data)?;
                Ok(t.gibbs.as_ref().map_or(0.0, |g| g.expected_loss_prior.iter().sum()))
            })
            .collect::<opb_core::Result<_>>()?,
        _ => vec![trace.cumulative_loss(); grid.len()],
    };
    let lookup = |l: f64| empirical[grid.iter().position(|&g| g == l).expect("grid point")];
    let (_, sel) = lambda_grid_select(grid, m, k, delta, lookup)?;
    let delta_each = delta / grid.len() as f64;
    let sweep = grid
        .iter()
        .zip(&empirical)
        .map(|(&l, &e)| Ok(format!("{l},{e},{}", opb_test_rhs(e, l, m, k, delta_each)?.total)))
        .collect::<CliResult<_>>()?;
    Ok((sel, sweep))
}

/// `coverage`: Monte-Carlo coverage of each requested bound on the
/// synthetic stream, with a PASS/FAIL line against the binomial envelope.
pub fn run_coverage(cfg: &ExperimentConfig) -> CliResult<Report> {
    let stream = cfg
        .synthetic
        .clone()
        .ok_or_else(|| CliError::Config("coverage requires a known data law: use `synthetic`".into()))?
        .with_seed(cfg.seed);
    let runs = resolve_all(cfg, stream.m, cfg.seed)?;
    let mut specs = Vec::new();
    for ((name, rc), entry) in runs.iter().zip(&cfg.algorithms) {
        let bounds = requested_bounds(cfg, entry, rc).unwrap_or_default();
        for &b in &bounds {
            check_compatibility(rc, b).map_err(|e| CliError::Config(format!("`{name}`: {e}")))?;
        }
        specs.push((
            name.clone(),
            CoverageSpec {
                stream: stream.clone(),
                run: rc.clone(),
                bounds,
                repetitions: cfg.coverage.repetitions,
                delta: cfg.delta,
                n_mc: cfg.coverage.n_mc,
                test_lambda: cfg.coverage.test_lambda,
                phi2_constant: cfg.phi2_constant,
            },
        ));
    }
    let mut report = Report::default();
    if cfg.coverage.repetitions == 1 {
        report
            .warnings
            .push("a single repetition gives coverage 0 or 1; the envelope check is degenerate".into());
    }
    let mut rows = Vec::new();
    let mut all_pass = true;
    for (name, spec) in &specs {
        let results: Vec<CoverageResult<f64>> = coverage_experiment(spec)?;
        for r in &results {
            rows.extend(r.csv_rows().into_iter().map(|row| format!("{name},{row}")));
            let verdict = if r.passes() { "PASS" } else { "FAIL" };
            all_pass &= r.passes();
            let mut line = format!(
                "{verdict} {name} {}: coverage {} (envelope {:.4}, violations {}/{})",
                r.kind.name(),
                r.coverage(),
                r.envelope(),
                r.violations,
                r.repetitions()
            );
            if r.precondition_breach() {
                line.push_str(&format!("; precondition breach: raw loss above K = {}", r.threshold));
            }
            report.lines.push(line);
        }
    }
    report.outputs.add_csv(
        "coverage.csv",
        &format!("algorithm,{}", CoverageResult::<f64>::CSV_HEADER),
        &rows,
    );
    report.lines.push(if all_pass { "PASS".into() } else { "FAIL".into() });
    if !all_pass {
        report.raise("coverage below the binomial envelope or boundedness precondition breached".into());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sample_statistics() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2.0_f64.sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[5.0, 5.0, 5.0]), (5.0, 0.0));
    }
}
