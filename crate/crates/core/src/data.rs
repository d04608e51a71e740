//! Data points and ordered datasets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vector::all_finite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Regression,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataPoint<T> {
    pub x: Vec<T>,
    pub y: T,
}

impl<T: Scalar> DataPoint<T> {
    pub fn new(x: Vec<T>, y: T) -> Self {
        Self { x, y }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    fn validate(&self, dim: usize, task: Task) -> Result<()> {
        if self.x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: self.x.len(),
            });
        }
        if !all_finite(&self.x) || !self.y.is_finite() {
            return Err(Error::InvalidData("non-finite coordinate".into()));
        }
        if task == Task::Classification && self.y != T::one() && self.y != -T::one() {
            return Err(Error::InvalidData(format!(
                "classification label {} is not in {{-1, +1}}",
                self.y
            )));
        }
        Ok(())
    }
}

/// An ordered stream of points. The order defines the filtration, so it is
/// never changed after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    points: Vec<DataPoint<T>>,
    dim: usize,
    task: Task,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(points: Vec<DataPoint<T>>, task: Task) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyDataset)?;
        let dim = first.dim();
        if dim == 0 {
            return Err(Error::InvalidData("zero-dimensional features".into()));
        }
        for (row, p) in points.iter().enumerate() {
            p.validate(dim, task)
                .map_err(|e| Error::InvalidData(format!("point {row}: {e}")))?;
        }
        Ok(Self { points, dim, task })
    }

    pub fn points(&self) -> &[DataPoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DataPoint<T>> {
        self.points.iter()
    }

    /// Same points in a different order.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::InvalidData("permutation length mismatch".into()));
        }
        let mut seen = vec![false; self.len()];
        let mut points = Vec::with_capacity(self.len());
        for &i in order {
            if i >= self.len() || seen[i] {
                return Err(Error::InvalidData("not a permutation".into()));
            }
            seen[i] = true;
            points.push(self.points[i].clone());
        }
        Ok(Self {
            points,
            dim: self.dim,
            task: self.task,
        })
    }

    pub fn into_points(self) -> Vec<DataPoint<T>> {
        self.points
    }
}
