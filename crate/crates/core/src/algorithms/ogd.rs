use crate::config::RunConfig;
use crate::data::{DataPoint, Dataset};
use crate::error::{invalid, Result};
use crate::loss::LossSpec;
use crate::scalar::Scalar;
use crate::trace::RunTrace;
use crate::vector::{add_scaled, norm};

#[derive(Debug, Clone, PartialEq)]
pub struct OgdState<T> {
    pub theta: Vec<T>,
    pub eta: T,
    /// `None` is the unconstrained case.
    pub radius: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OgdStep<T> {
    pub predictor: Vec<T>,
    pub loss: T,
    pub raw_loss: T,
}

/// Projected online gradient descent with a fixed step.
#[derive(Debug, Clone)]
pub struct OgdLearner<T: Scalar> {
    state: OgdState<T>,
    loss: LossSpec<T>,
}

impl<T: Scalar> OgdLearner<T> {
    pub fn new(state: OgdState<T>, loss: LossSpec<T>) -> Result<Self> {
        if !(state.eta > T::zero()) {
            return Err(invalid("eta", "step size must be positive"));
        }
        let mut learner = Self { state, loss };
        learner.project();
        Ok(learner)
    }

    pub fn from_config(cfg: &RunConfig<T>, dim: usize) -> Result<Self> {
        cfg.validate()?;
        Self::new(
            OgdState {
                theta: vec![T::zero(); dim],
                eta: cfg.eta,
                radius: cfg.radius,
            },
            cfg.loss,
        )
    }

    pub fn state(&self) -> &OgdState<T> {
        &self.state
    }

    fn project(&mut self) {
        if let Some(r) = self.state.radius {
            let n = norm(&self.state.theta);
            if n > r {
                let scale = r / n;
                self.state.theta.iter_mut().for_each(|v| *v = *v * scale);
            }
        }
    }

    /// Plays `theta_i`, suffers its loss on `z`, then takes a projected
    /// subgradient step.
    pub fn step(&mut self, z: &DataPoint<T>) -> Result<OgdStep<T>> {
        let predictor = self.state.theta.clone();
        let raw_loss = self.loss.raw(&predictor, z)?;
        let grad = self.loss.subgradient(&predictor, z)?;
        self.state.theta = add_scaled(&self.state.theta, -self.state.eta, &grad);
        self.project();
        Ok(OgdStep {
            predictor,
            loss: raw_loss.min(self.loss.threshold),
            raw_loss,
        })
    }
}

pub fn ogd_run<T: Scalar>(cfg: &RunConfig<T>, data: &Dataset<T>) -> Result<RunTrace<T>> {
    let mut learner = OgdLearner::from_config(cfg, data.dim())?;
    let mut losses = Vec::with_capacity(data.len());
    let mut predictors = Vec::with_capacity(data.len());
    let mut max_raw = T::zero();
    for z in data.iter() {
        let s = learner.step(z)?;
        max_raw = max_raw.max(s.raw_loss);
        losses.push(s.loss);
        predictors.push(s.predictor);
    }
    Ok(RunTrace::new(cfg.algorithm, losses, predictors, max_raw))
}

/// Regret bound `D^2 / (2 eta) + eta T G^2` of projected OGD over a set of
/// diameter `D` with gradients bounded by `G`.
pub fn ogd_regret_bound<T: Scalar>(diameter: T, grad_bound: T, eta: T, horizon: usize) -> Result<T> {
    if !(diameter > T::zero()) || !(grad_bound > T::zero()) || !(eta > T::zero()) || horizon == 0 {
        return Err(invalid("ogd_regret_bound", "all inputs must be positive"));
    }
    let two = T::one() + T::one();
    Ok(diameter * diameter / (two * eta) + eta * T::lit(horizon as f64) * grad_bound * grad_bound)
}
