//! Lloyd-style clustering: weighted Lloyd over privatized grid synopses, plain
//! Lloyd on raw points, and the interactive DPLloyd baseline.

mod dplloyd;
mod lloyd;

pub use dplloyd::{dplloyd, dplloyd_initialization, DpLloydConfig, DpLloydOutput};
pub use lloyd::{
    nonprivate_kmeans, nonprivate_kmeans_traced, weighted_lloyd, weighted_lloyd_traced, LloydRun,
    RestartTrace,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::types::RngSeed;

/// Grid centres with their (possibly negative) noisy counts.
///
/// Raw weights are kept for diagnostics; every computation uses
/// `max(weight, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPointSet<T> {
    points: Vec<Vec<T>>,
    weights: Vec<T>,
}

impl<T: Real> WeightedPointSet<T> {
    pub fn new(points: Vec<Vec<T>>, weights: Vec<T>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: weights.len(),
            });
        }
        if let Some(first) = points.first() {
            if let Some(bad) = points.iter().find(|p| p.len() != first.len()) {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    found: bad.len(),
                });
            }
        }
        Ok(Self { points, weights })
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn raw_weights(&self) -> &[T] {
        &self.weights
    }

    pub fn effective_weights(&self) -> Vec<T> {
        self.weights
            .iter()
            .map(|&w| if w > T::zero() { w } else { T::zero() })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LloydConfig<T> {
    pub k: usize,
    pub max_iterations: usize,
    /// Converged once no centroid moves farther than this.
    pub tolerance: T,
    pub restarts: usize,
    pub seed: RngSeed,
}

impl<T: Real> LloydConfig<T> {
    /// 100 iterations, tolerance `1e-6`, 10 restarts.
    pub fn new(k: usize, seed: RngSeed) -> Self {
        Self {
            k,
            max_iterations: 100,
            tolerance: T::of(1e-6),
            restarts: 10,
            seed,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "restarts and max_iterations must be at least 1".into(),
            ));
        }
        if !(self.tolerance >= T::zero()) {
            return Err(Error::InvalidParameter("tolerance must be non-negative".into()));
        }
        Ok(())
    }
}
