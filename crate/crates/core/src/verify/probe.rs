//! Exponential moment of the centred loss sum on two-valued-loss streams.
//!
//! The stream is a Markov chain of bits `b_i` and the prior chain draws
//! `h_i` in `{0, 1}`; the loss is `K 1[h_i != b_i]`. With
//! `l~_i = E[loss(h_i, b_i) | past] - loss(h_i, b_i)` the probe estimates
//! `xi_m = E exp(lambda sum l~_i)` and compares it with `exp(lambda^2 m K^2 / 2)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{repetition_seed, stream_rng, streams};
use crate::scalar::Scalar;
use crate::vector::log_sum_exp;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", bound = "")]
pub enum PriorChain<T: Scalar> {
    /// `P(h_i = 1) = q` at every step.
    Fixed { q: T },
    /// Laplace rule of succession on the past bits.
    Laplace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ProbeSpec<T: Scalar> {
    /// `P(b_i = b_{i-1})`; `b_1` is a fair coin.
    pub stay: T,
    pub prior: PriorChain<T>,
    pub lambda: T,
    pub m: usize,
    pub k: T,
    pub repetitions: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeResult<T> {
    pub estimate: T,
    pub log_estimate: T,
    /// Relative Monte-Carlo standard error of `estimate`.
    pub relative_se: T,
    pub bound: T,
    pub ratio: T,
}

impl<T: Scalar> ProbeResult<T> {
    /// `estimate <= bound (1 + 3 relative_se)`
    pub fn within_bound(&self) -> bool {
        self.ratio <= T::one() + T::lit(3.0) * self.relative_se
    }
}

impl<T: Scalar> ProbeSpec<T> {
    fn validate(&self) -> Result<()> {
        let unit = |v: T| v >= T::zero() && v <= T::one();
        if !unit(self.stay) {
            return Err(invalid("stay", "must lie in [0, 1]"));
        }
        if let PriorChain::Fixed { q } = self.prior {
            if !unit(q) {
                return Err(invalid("q", "must lie in [0, 1]"));
            }
        }
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return Err(invalid("lambda", "must be finite and non-negative"));
        }
        if self.m == 0 || self.repetitions == 0 {
            return Err(invalid("m", "m and repetitions must be at least 1"));
        }
        if !(self.k > T::zero()) || !self.k.is_finite() {
            return Err(invalid("K", "must be positive and finite"));
        }
        Ok(())
    }

    /// `P(b_i = 1 | b_{i-1})`
    fn p_one(&self, prev: Option<bool>) -> T {
        match prev {
            None => T::lit(0.5),
            Some(true) => self.stay,
            Some(false) => T::one() - self.stay,
        }
    }

    /// `P(h_i = 1)` after `i - 1` bits of which `ones` are set.
    fn q(&self, i: usize, ones: usize) -> T {
        match self.prior {
            PriorChain::Fixed { q } => q,
            PriorChain::Laplace => T::lit((ones + 1) as f64) / T::lit((i + 1) as f64),
        }
    }

    /// `l~ = E[loss | past] - loss` for a drawn `h` and bit `b`.
    fn centred(&self, p1: T, h: bool, b: bool) -> T {
        let expected = if h { T::one() - p1 } else { p1 };
        let incurred = if h != b { T::one() } else { T::zero() };
        self.k * (expected - incurred)
    }
}

fn bernoulli<T: Scalar, R: Rng + ?Sized>(p: T, rng: &mut R) -> bool {
    T::lit(rng.random::<f64>()) < p
}

/// Monte-Carlo estimate of `xi_m` with log-domain accumulation.
pub fn exp_moment_probe<T: Scalar>(spec: &ProbeSpec<T>) -> Result<ProbeResult<T>> {
    spec.validate()?;
    let exponents: Vec<T> = (0..spec.repetitions)
        .map(|rep| {
            let mut rng = stream_rng(repetition_seed(spec.seed, rep as u64), streams::MONTE_CARLO);
            let mut prev = None;
            let mut ones = 0usize;
            let mut sum = T::zero();
            for i in 1..=spec.m {
                let p1 = spec.p_one(prev);
                let h = bernoulli(spec.q(i, ones), &mut rng);
                let b = bernoulli(p1, &mut rng);
                sum = sum + spec.centred(p1, h, b);
                ones += usize::from(b);
                prev = Some(b);
            }
            spec.lambda * sum
        })
        .collect();
    let n = T::lit(spec.repetitions as f64);
    let log_estimate = log_sum_exp(&exponents) - n.ln();
    let shifted: Vec<T> = exponents.iter().map(|&e| (e - log_estimate).exp()).collect();
    let relative_se = if spec.repetitions > 1 {
        let var = shifted.iter().map(|&v| (v - T::one()) * (v - T::one())).sum::<T>() / (n - T::one());
        (var / n).sqrt()
    } else {
        T::zero()
    };
    let log_bound = spec.lambda * spec.lambda * T::lit(spec.m as f64) * spec.k * spec.k * T::lit(0.5);
    Ok(ProbeResult {
        estimate: log_estimate.exp(),
        log_estimate,
        relative_se,
        bound: log_bound.exp(),
        ratio: (log_estimate - log_bound).exp(),
    })
}

/// Exact `xi_m` by dynamic programming over `(b_i, number of ones)`.
pub fn exp_moment_exact<T: Scalar>(spec: &ProbeSpec<T>) -> Result<T> {
    spec.validate()?;
    // mass[b][c]: E[exp(lambda sum l~) ; b_i = b, ones = c]
    let mut mass = vec![[T::zero(); 2]; spec.m + 1];
    let mut started = false;
    for i in 1..=spec.m {
        let mut next = vec![[T::zero(); 2]; spec.m + 1];
        let sources: Vec<(Option<bool>, usize, T)> = if started {
            (0..i)
                .flat_map(|c| [(Some(false), c, mass[c][0]), (Some(true), c, mass[c][1])])
                .filter(|(_, _, w)| *w > T::zero())
                .collect()
        } else {
            vec![(None, 0, T::one())]
        };
        for (prev, c, w) in sources {
            let p1 = spec.p_one(prev);
            let q = spec.q(i, c);
            for h in [false, true] {
                let ph = if h { q } else { T::one() - q };
                for b in [false, true] {
                    let pb = if b { p1 } else { T::one() - p1 };
                    let f = (spec.lambda * spec.centred(p1, h, b)).exp();
                    let nc = c + usize::from(b);
                    next[nc][usize::from(b)] = next[nc][usize::from(b)] + w * ph * pb * f;
                }
            }
        }
        mass = next;
        started = true;
    }
    Ok(mass.iter().map(|s| s[0] + s[1]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(lambda: f64, m: usize, k: f64) -> ProbeSpec<f64> {
        ProbeSpec {
            stay: 0.8,
            prior: PriorChain::Laplace,
            lambda,
            m,
            k,
            repetitions: 20_000,
            seed: 11,
        }
    }

    #[test]
    fn zero_scale_gives_one() {
        let r = exp_moment_probe(&spec(0.0, 20, 1.0)).unwrap();
        assert_eq!(r.estimate, 1.0);
        // the dynamic program sums probabilities, so only up to rounding
        assert!((exp_moment_exact(&spec(0.0, 20, 1.0)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_fair_step() {
        let s = ProbeSpec {
            prior: PriorChain::Fixed { q: 0.5 },
            ..spec(0.5, 1, 2.0)
        };
        let exact = exp_moment_exact(&s).unwrap();
        assert!((exact - 0.5_f64.cosh()).abs() < 1e-15);
        assert!((exact - 1.1276).abs() < 1e-4);
        assert!((1.0_f64 / 8.0).exp() - 1.1331 < 1e-4);
        assert!(exact <= (1.0_f64 / 8.0).exp());
        let r = exp_moment_probe(&s).unwrap();
        assert!((r.estimate - exact).abs() < 3.0 * r.relative_se * exact);
    }

    #[test]
    fn probe_matches_exact() {
        for (l, m) in [(0.3, 5), (0.1, 40)] {
            let s = spec(l, m, 1.0);
            let exact = exp_moment_exact(&s).unwrap();
            let r = exp_moment_probe(&s).unwrap();
            assert!((r.estimate - exact).abs() < 4.0 * r.relative_se * exact, "{} vs {exact}", r.estimate);
            assert!(r.within_bound());
        }
    }

    #[test]
    fn larger_threshold_lowers_ratio() {
        let a = exp_moment_probe(&spec(0.3, 10, 1.0)).unwrap();
        let mut s = spec(0.3, 10, 2.0);
        s.k = 2.0;
        // same bits and draws, the centred losses simply double
        let b = exp_moment_probe(&s).unwrap();
        assert!(b.bound > a.bound);
        assert!(exp_moment_exact(&spec(0.3, 10, 2.0)).unwrap() / b.bound < a.ratio);
    }
}
