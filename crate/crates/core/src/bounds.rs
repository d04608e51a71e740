//! Right-hand sides of the online PAC-Bayes bounds.
//!
//! All logarithms are natural. Evaluators are pure arithmetic: the caller
//! supplies the empirical term and the divergence terms.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Main,
    OpbTrain,
    OpbTest,
    Naive,
    OpbdPsi1Train,
    OpbdPsi2Train,
    OpbdPhi1Test,
    OpbdPhi2Test,
}

impl BoundKind {
    pub const ALL: [BoundKind; 8] = [
        BoundKind::Main,
        BoundKind::OpbTrain,
        BoundKind::OpbTest,
        BoundKind::Naive,
        BoundKind::OpbdPsi1Train,
        BoundKind::OpbdPsi2Train,
        BoundKind::OpbdPhi1Test,
        BoundKind::OpbdPhi2Test,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Main => "main",
            BoundKind::OpbTrain => "opb_train",
            BoundKind::OpbTest => "opb_test",
            BoundKind::Naive => "naive",
            BoundKind::OpbdPsi1Train => "opbd_psi1_train",
            BoundKind::OpbdPsi2Train => "opbd_psi2_train",
            BoundKind::OpbdPhi1Test => "opbd_phi1_test",
            BoundKind::OpbdPhi2Test => "opbd_phi2_test",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Rate functions of the disintegrated bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiVariant {
    Phi1Train,
    Phi2Train,
    Phi1Test,
    Phi2Test,
}

/// Confidence constant used by `Phi2Train`.
///
/// `AsStated` uses `3 ln(1/delta) / (2 lambda)`; `ProofDerived` uses
/// `3 ln(2/delta) / (2 lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phi2Constant {
    #[default]
    AsStated,
    ProofDerived,
}

/// Evaluated bound with its additive terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BoundReport<T: Scalar> {
    pub kind: BoundKind,
    pub empirical: T,
    /// Divergence sum, already divided by lambda.
    pub divergence: T,
    /// Part of the rate function that grows with `lambda m K^2`.
    pub rate: T,
    /// Part of the rate function driven by `delta`.
    pub confidence: T,
    pub total: T,
    pub lambda: T,
    pub delta: T,
    pub k: T,
    pub m: usize,
}

impl<T: Scalar> BoundReport<T> {
    pub const CSV_HEADER: &'static str = "kind,empirical,divergence,rate,confidence,total,lambda,delta,k,m";

    pub fn penalty(&self) -> T {
        self.rate + self.confidence
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.kind.name(),
            self.empirical,
            self.divergence,
            self.rate,
            self.confidence,
            self.total,
            self.lambda,
            self.delta,
            self.k,
            self.m
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        kind: BoundKind,
        empirical: T,
        divergence: T,
        rate: T,
        confidence: T,
        p: Params<T>,
    ) -> Result<Self> {
        let total = empirical + divergence + rate + confidence;
        if ![empirical, divergence, rate, confidence, total].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidData(format!("{} bound has a non-finite term", kind.name())));
        }
        Ok(Self {
            kind,
            empirical,
            divergence,
            rate,
            confidence,
            total,
            lambda: p.lambda,
            delta: p.delta,
            k: p.k,
            m: p.m,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Params<T> {
    lambda: T,
    m: usize,
    k: T,
    delta: T,
}

fn check_params<T: Scalar>(lambda: T, m: usize, k: T, delta: T) -> Result<Params<T>> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(invalid("lambda", "must be positive and finite"));
    }
    if m == 0 {
        return Err(invalid("m", "must be at least 1"));
    }
    if !(k > T::zero()) || !k.is_finite() {
        return Err(invalid("K", "must be positive and finite"));
    }
    if !(delta > T::zero() && delta < T::one()) {
        return Err(invalid("delta", "must lie in (0, 1)"));
    }
    Ok(Params { lambda, m, k, delta })
}

fn check_empirical<T: Scalar>(empirical: T) -> Result<()> {
    if !empirical.is_finite() {
        return Err(invalid("empirical", "must be finite"));
    }
    Ok(())
}

fn divergence_sum<T: Scalar>(kl_terms: &[T], lambda: T) -> Result<T> {
    if kl_terms.iter().any(|k| !(*k >= T::zero()) || !k.is_finite()) {
        return Err(invalid("kl_terms", "must be finite and non-negative"));
    }
    Ok(kl_terms.iter().copied().sum::<T>() / lambda)
}

fn m_k2<T: Scalar>(p: &Params<T>) -> T {
    T::lit(p.m as f64) * p.k * p.k
}

fn half<T: Scalar>() -> T {
    T::lit(0.5)
}

/// `empirical + sum(kl) / lambda + lambda m K^2 / 2 + ln(1/delta) / lambda`
pub fn main_bound_rhs<T: Scalar>(
    empirical: T,
    kl_terms: &[T],
    lambda: T,
    m: usize,
    k: T,
    delta: T,
) -> Result<BoundReport<T>> {
    kl_form(BoundKind::Main, empirical, kl_terms, lambda, m, k, delta)
}

/// Same arithmetic as [`main_bound_rhs`], with `KL(Q_{i+1} || P_i)` terms.
pub fn opb_train_rhs<T: Scalar>(
    empirical: T,
    kl_terms: &[T],
    lambda: T,
    m: usize,
    k: T,
    delta: T,
) -> Result<BoundReport<T>> {
    kl_form(BoundKind::OpbTrain, empirical, kl_terms, lambda, m, k, delta)
}

fn kl_form<T: Scalar>(
    kind: BoundKind,
    empirical: T,
    kl_terms: &[T],
    lambda: T,
    m: usize,
    k: T,
    delta: T,
) -> Result<BoundReport<T>> {
    let p = check_params(lambda, m, k, delta)?;
    check_empirical(empirical)?;
    let div = divergence_sum(kl_terms, lambda)?;
    let rate = lambda * m_k2(&p) * half();
    let conf = (T::one() / delta).ln() / lambda;
    BoundReport::assemble(kind, empirical, div, rate, conf, p)
}

/// `empirical + lambda m K^2 / 2 + ln(1/delta) / lambda`
pub fn opb_test_rhs<T: Scalar>(empirical: T, lambda: T, m: usize, k: T, delta: T) -> Result<BoundReport<T>> {
    let p = check_params(lambda, m, k, delta)?;
    check_empirical(empirical)?;
    let rate = lambda * m_k2(&p) * half();
    let conf = (T::one() / delta).ln() / lambda;
    BoundReport::assemble(BoundKind::OpbTest, empirical, T::zero(), rate, conf, p)
}

/// `sqrt(2 ln(1/delta) / (m K^2))`, where both penalty terms of
/// [`opb_test_rhs`] are equal.
pub fn optimal_lambda_test<T: Scalar>(m: usize, k: T, delta: T) -> Result<T> {
    let p = check_params(T::one(), m, k, delta)?;
    Ok((T::lit(2.0) * (T::one() / delta).ln() / m_k2(&p)).sqrt())
}

/// Minimiser of `Phi2Test`: `sqrt(ln(1/delta) / (2 m K^2))`.
pub fn optimal_lambda_phi2_test<T: Scalar>(m: usize, k: T, delta: T) -> Result<T> {
    let p = check_params(T::one(), m, k, delta)?;
    Ok(((T::one() / delta).ln() / (T::lit(2.0) * m_k2(&p))).sqrt())
}

fn phi_terms<T: Scalar>(variant: PhiVariant, p: &Params<T>, constant: Phi2Constant) -> (T, T) {
    let lmk2 = p.lambda * m_k2(p);
    let log_inv = (T::one() / p.delta).ln();
    match variant {
        PhiVariant::Phi1Train | PhiVariant::Phi1Test => (lmk2 * half(), log_inv / p.lambda),
        PhiVariant::Phi2Train => {
            let log_term = match constant {
                Phi2Constant::AsStated => log_inv,
                Phi2Constant::ProofDerived => (T::lit(2.0) / p.delta).ln(),
            };
            (lmk2, T::lit(1.5) * log_term / p.lambda)
        }
        PhiVariant::Phi2Test => (T::lit(2.0) * lmk2, log_inv / p.lambda),
    }
}

pub fn opbd_phi<T: Scalar>(variant: PhiVariant, lambda: T, m: usize, k: T, delta: T) -> Result<T> {
    opbd_phi_with(variant, lambda, m, k, delta, Phi2Constant::AsStated)
}

pub fn opbd_phi_with<T: Scalar>(
    variant: PhiVariant,
    lambda: T,
    m: usize,
    k: T,
    delta: T,
    constant: Phi2Constant,
) -> Result<T> {
    let p = check_params(lambda, m, k, delta)?;
    let (r, c) = phi_terms(variant, &p, constant);
    Ok(r + c)
}

/// Training bound of the disintegrated algorithm:
/// `empirical + sum(psi) + Phi(m)`. The `psi_terms` are the per-step
/// penalties already divided by lambda; they may be negative for the first
/// variant.
#[allow(clippy::too_many_arguments)]
pub fn opbd_train_rhs<T: Scalar>(
    variant: crate::config::OpbdVariant,
    empirical: T,
    psi_terms: &[T],
    lambda: T,
    m: usize,
    k: T,
    delta: T,
    constant: Phi2Constant,
) -> Result<BoundReport<T>> {
    use crate::config::OpbdVariant;
    let p = check_params(lambda, m, k, delta)?;
    check_empirical(empirical)?;
    if psi_terms.iter().any(|v| !v.is_finite()) {
        return Err(invalid("psi_terms", "must be finite"));
    }
    let (kind, phi) = match variant {
        OpbdVariant::Psi1 => (BoundKind::OpbdPsi1Train, PhiVariant::Phi1Train),
        OpbdVariant::Psi2 => (BoundKind::OpbdPsi2Train, PhiVariant::Phi2Train),
    };
    let (rate, conf) = phi_terms(phi, &p, constant);
    let div = psi_terms.iter().copied().sum::<T>();
    BoundReport::assemble(kind, empirical, div, rate, conf, p)
}

/// Test bound of the disintegrated algorithm: `empirical + Phi(m)`.
pub fn opbd_test_rhs<T: Scalar>(
    variant: PhiVariant,
    empirical: T,
    lambda: T,
    m: usize,
    k: T,
    delta: T,
) -> Result<BoundReport<T>> {
    let kind = match variant {
        PhiVariant::Phi1Test => BoundKind::OpbdPhi1Test,
        PhiVariant::Phi2Test => BoundKind::OpbdPhi2Test,
        _ => return Err(invalid("variant", "test bound needs a test rate function")),
    };
    let p = check_params(lambda, m, k, delta)?;
    check_empirical(empirical)?;
    let (rate, conf) = phi_terms(variant, &p, Phi2Constant::AsStated);
    BoundReport::assemble(kind, empirical, T::zero(), rate, conf, p)
}

/// Union-bound version over one confidence level per step:
/// `empirical + sum(kl) / lambda + lambda m K^2 / 2 + m ln(m/delta) / lambda`.
pub fn naive_bound_rhs<T: Scalar>(
    empirical: T,
    kl_terms: &[T],
    lambda: T,
    m: usize,
    k: T,
    delta: T,
) -> Result<BoundReport<T>> {
    let p = check_params(lambda, m, k, delta)?;
    check_empirical(empirical)?;
    let div = divergence_sum(kl_terms, lambda)?;
    let mf = T::lit(m as f64);
    let rate = lambda * m_k2(&p) * half();
    let conf = mf * (mf / delta).ln() / lambda;
    BoundReport::assemble(BoundKind::Naive, empirical, div, rate, conf, p)
}

/// Picks the grid point minimising the test bound at confidence
/// `delta / |grid|`. Ties go to the smaller lambda.
pub fn lambda_grid_select<T: Scalar, F: FnMut(T) -> T>(
    grid: &[T],
    m: usize,
    k: T,
    delta: T,
    mut empirical_fn: F,
) -> Result<(T, BoundReport<T>)> {
    if grid.is_empty() {
        return Err(invalid("grid", "must not be empty"));
    }
    let delta_each = delta / T::lit(grid.len() as f64);
    let mut best: Option<(T, BoundReport<T>)> = None;
    for &lambda in grid {
        let report = opb_test_rhs(empirical_fn(lambda), lambda, m, k, delta_each)?;
        let better = match &best {
            None => true,
            Some((bl, br)) => report.total < br.total || (report.total == br.total && lambda < *bl),
        };
        if better {
            best = Some((lambda, report));
        }
    }
    Ok(best.expect("grid is non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::OpbdVariant;

    const E_INV: f64 = 0.36787944117144233;

    #[test]
    fn main_bound_example() {
        let r = main_bound_rhs(0.0, &[0.0, 0.0], 1.0, 1, 1.0, E_INV).unwrap();
        assert!((r.total - 1.5).abs() < 1e-12);
        assert!((r.rate - 0.5).abs() < 1e-15);
        let near_one = main_bound_rhs(0.0, &[], 1.0, 1, 1.0, 1.0 - 1e-12).unwrap();
        assert!(near_one.confidence < 1e-11);
    }

    #[test]
    fn lambda_homogeneity() {
        let a = main_bound_rhs(1.0_f64, &[0.3, 0.2], 0.5, 10, 2.0, 0.1).unwrap();
        let b = main_bound_rhs(1.0, &[0.3, 0.2], 1.0, 10, 2.0, 0.1).unwrap();
        assert!((b.rate - 2.0 * a.rate).abs() < 1e-12);
        assert!((b.divergence - a.divergence / 2.0).abs() < 1e-12);
        assert!((b.confidence - a.confidence / 2.0).abs() < 1e-12);
    }

    #[test]
    fn train_matches_main() {
        let a = main_bound_rhs(3.0, &[0.1, 0.4], 0.2, 7, 1.5, 0.05).unwrap();
        let b = opb_train_rhs(3.0, &[0.1, 0.4], 0.2, 7, 1.5, 0.05).unwrap();
        assert_eq!(a.total, b.total);
        assert_eq!(b.kind, BoundKind::OpbTrain);
    }

    #[test]
    fn test_bound_at_optimum() {
        let l = optimal_lambda_test(100, 1.0_f64, 0.05).unwrap();
        // 0.24479 as quoted to five digits; the exact value is 0.2447747
        assert!((l - 0.24479).abs() < 2e-5);
        assert!((l - 0.244_774_683_068_081_6).abs() < 1e-15);
        let r = opb_test_rhs(0.0, l, 100, 1.0, 0.05).unwrap();
        assert!((r.total - 24.48).abs() < 5e-3);
        assert!((r.rate - r.confidence).abs() < 1e-12);
        assert!((r.total - (2.0_f64 * 100.0 * 20.0_f64.ln()).sqrt()).abs() < 1e-12);
        let l4 = optimal_lambda_test(400, 1.0, 0.05).unwrap();
        assert!((l4 - l / 2.0).abs() < 1e-15);
        assert!(opb_test_rhs(0.0, 1.0, 0, 1.0, 0.05).is_err());
    }

    #[test]
    fn kl_free_main_is_test() {
        let a = main_bound_rhs(2.0, &[0.0; 4], 0.3, 4, 1.0, 0.1).unwrap();
        let b = opb_test_rhs(2.0, 0.3, 4, 1.0, 0.1).unwrap();
        assert_eq!(a.total, b.total);
    }

    #[test]
    fn phi_examples() {
        assert!((opbd_phi(PhiVariant::Phi1Train, 1.0, 1, 1.0, E_INV).unwrap() - 1.5).abs() < 1e-12);
        assert!((opbd_phi(PhiVariant::Phi2Test, 1.0, 1, 1.0, E_INV).unwrap() - 3.0).abs() < 1e-12);
        assert!((opbd_phi(PhiVariant::Phi2Train, 1.0, 1, 1.0, E_INV).unwrap() - 2.5).abs() < 1e-12);
        let proof = opbd_phi_with(PhiVariant::Phi2Train, 1.0, 1, 1.0, E_INV, Phi2Constant::ProofDerived).unwrap();
        assert!((proof - (1.0 + 1.5 * (2.0 / E_INV).ln())).abs() < 1e-12);
        for (l, m, k, d) in [(0.1, 5, 2.0, 0.3), (3.0, 100, 0.5, 0.01)] {
            assert_eq!(
                opbd_phi(PhiVariant::Phi1Train, l, m, k, d).unwrap(),
                opbd_phi(PhiVariant::Phi1Test, l, m, k, d).unwrap()
            );
        }
        let l = optimal_lambda_phi2_test(50, 2.0, 0.05).unwrap();
        let at = opbd_phi(PhiVariant::Phi2Test, l, 50, 2.0, 0.05).unwrap();
        for f in [0.8, 0.95, 1.05, 1.2] {
            assert!(opbd_phi(PhiVariant::Phi2Test, l * f, 50, 2.0, 0.05).unwrap() > at);
        }
    }

    #[test]
    fn opbd_reports() {
        let r = opbd_train_rhs(OpbdVariant::Psi1, 1.0, &[-0.5, 0.25], 1.0, 1, 1.0, E_INV, Phi2Constant::AsStated)
            .unwrap();
        assert!((r.total - (1.0 - 0.25 + 1.5)).abs() < 1e-12);
        let t = opbd_test_rhs(PhiVariant::Phi2Test, 0.5, 1.0, 1, 1.0, E_INV).unwrap();
        assert!((t.total - 3.5).abs() < 1e-12);
        assert!(opbd_test_rhs(PhiVariant::Phi1Train, 0.5, 1.0, 1, 1.0, E_INV).is_err());
    }

    #[test]
    fn naive_examples() {
        let a = naive_bound_rhs(0.5_f64, &[0.2], 0.7, 1, 1.0, 0.1).unwrap();
        let b = main_bound_rhs(0.5, &[0.2], 0.7, 1, 1.0, 0.1).unwrap();
        assert!((a.total - b.total).abs() < 1e-12);
        let n = naive_bound_rhs(0.0_f64, &[0.0], 1.0, 100, 1.0, 0.05).unwrap();
        // 50 + 100 ln 2000
        assert!((n.total - 810.090_245_954_208_2).abs() < 1e-9);
    }

    #[test]
    fn grid_selection() {
        let l = optimal_lambda_test(100, 1.0, 0.05).unwrap();
        let (best, r) = lambda_grid_select(&[l], 100, 1.0, 0.05, |_| 1.0).unwrap();
        assert_eq!(best, l);
        assert_eq!(r.delta, 0.05);
        let (best, _) = lambda_grid_select(&[10.0 * l, l], 100, 1.0, 0.05, |_| 1.0).unwrap();
        assert_eq!(best, l);
        let grid: Vec<f64> = (1..=10).map(|i| i as f64 * 0.05).collect();
        let (_, r) = lambda_grid_select(&grid, 100, 1.0, 0.05, |_| 0.0).unwrap();
        assert!((r.confidence * r.lambda - (10.0_f64 / 0.05).ln()).abs() < 1e-12);
        // a huge empirical term absorbs the penalties, so all totals tie
        let (best, _) = lambda_grid_select(&[2.0, 1.0, 3.0], 1, 1.0, 0.5, |_| 1e20).unwrap();
        assert_eq!(best, 1.0);
        assert!(lambda_grid_select::<f64, _>(&[], 10, 1.0, 0.05, |_| 0.0).is_err());
    }

    #[test]
    fn parameter_errors() {
        assert!(main_bound_rhs(0.0, &[], 0.0, 1, 1.0, 0.1).is_err());
        assert!(main_bound_rhs(0.0, &[], 1.0, 1, 0.0, 0.1).is_err());
        assert!(main_bound_rhs(0.0, &[], 1.0, 1, 1.0, 1.0).is_err());
        assert!(main_bound_rhs(0.0, &[-0.1], 1.0, 1, 1.0, 0.5).is_err());
    }

    #[test]
    fn csv_row_layout() {
        let r = opb_test_rhs(1.0, 0.5, 2, 1.0, 0.5).unwrap();
        let row = r.csv_row();
        assert_eq!(row.split(',').count(), BoundReport::<f64>::CSV_HEADER.split(',').count());
        assert!(row.starts_with("opb_test,1,0,"));
    }
}
