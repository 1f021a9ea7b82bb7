//! Domain types shared across the crate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// The data domain `[-r, r]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBounds<T> {
    r: T,
    d: usize,
}

impl<T: Real> DomainBounds<T> {
    pub fn new(r: T, d: usize) -> Result<Self> {
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "half-width r must be positive and finite, got {r}"
            )));
        }
        if d == 0 {
            return Err(Error::InvalidDimension {
                d,
                reason: "dimension must be at least 1",
            });
        }
        Ok(Self { r, d })
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Grid sizing assumes d >= 2; one-dimensional data is accepted elsewhere.
    pub fn is_one_dimensional(&self) -> bool {
        self.d == 1
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.d && x.iter().all(|&v| v >= -self.r && v <= self.r)
    }

    pub fn clamp(&self, v: T) -> T {
        v.max(-self.r).min(self.r)
    }
}

/// N points inside a [`DomainBounds`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<T> {
    points: Vec<Vec<T>>,
    bounds: DomainBounds<T>,
}

impl<T: Real> Dataset<T> {
    /// Validates that every point has dimension `d` and lies in the domain.
    pub fn new(points: Vec<Vec<T>>, bounds: DomainBounds<T>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for (row, p) in points.iter().enumerate() {
            if p.len() != bounds.d() {
                return Err(Error::DimensionMismatch {
                    expected: bounds.d(),
                    found: p.len(),
                });
            }
            if let Some(column) = p.iter().position(|&v| !(v >= -bounds.r() && v <= bounds.r())) {
                return Err(Error::OutOfDomain {
                    row: row + 1,
                    column: column + 1,
                    value: p[column].as_f64(),
                    r: bounds.r().as_f64(),
                });
            }
        }
        Ok(Self { points, bounds })
    }

    /// Like [`Dataset::new`] but clamps coordinates into the domain instead of rejecting them.
    pub fn clipped(mut points: Vec<Vec<T>>, bounds: DomainBounds<T>) -> Result<Self> {
        for p in &mut points {
            for v in p.iter_mut() {
                *v = bounds.clamp(*v);
            }
        }
        Self::new(points, bounds)
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn bounds(&self) -> DomainBounds<T> {
        self.bounds
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.bounds.d()
    }
}

/// Pure epsilon-DP budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget<T> {
    epsilon: T,
}

impl<T: Real> PrivacyBudget<T> {
    pub fn new(epsilon: T) -> Result<Self> {
        if !(epsilon > T::zero()) || epsilon.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "privacy budget must be positive, got {epsilon}"
            )));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }
}

/// K centroids together with their per-cluster WCSS and the averaged objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel<T> {
    pub centroids: Vec<Vec<T>>,
    pub per_cluster_wcss: Vec<T>,
    /// `(1/K) * sum(per_cluster_wcss)`.
    pub objective: T,
    pub assignment: Vec<usize>,
}

impl<T: Real> ClusterModel<T> {
    pub(crate) fn from_parts(
        centroids: Vec<Vec<T>>,
        per_cluster_wcss: Vec<T>,
        assignment: Vec<usize>,
    ) -> Self {
        let k = T::of_usize(centroids.len());
        let objective = per_cluster_wcss.iter().copied().sum::<T>() / k;
        Self {
            centroids,
            per_cluster_wcss,
            objective,
            assignment,
        }
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }
}

/// Seed for every randomized operation.
///
/// Generators are `ChaCha8Rng::seed_from_u64(seed)`. Independent streams are
/// derived with [`RngSeed::derive`], a SplitMix64-based mix of the parent seed
/// and a stream index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// `mix(seed, stream) = splitmix64(seed ^ splitmix64(stream))`.
    pub fn derive(self, stream: u64) -> RngSeed {
        RngSeed(splitmix64(self.0 ^ splitmix64(stream)))
    }

    /// Folds a path of stream indices, e.g. `(cell, trial)`.
    pub fn derive_path(self, path: &[u64]) -> RngSeed {
        path.iter().fold(self, |s, &i| s.derive(i))
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}

/// SplitMix64 finalizer (Steele, Lea and Flood).
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_reject_nonpositive_r() {
        assert!(DomainBounds::new(0.0_f64, 2).is_err());
        assert!(DomainBounds::new(-1.0_f64, 2).is_err());
        assert!(DomainBounds::new(1.0_f64, 0).is_err());
        assert!(DomainBounds::new(1.0_f64, 1).unwrap().is_one_dimensional());
    }

    #[test]
    fn dataset_rejects_out_of_domain() {
        let b = DomainBounds::new(1.0, 2).unwrap();
        let err = Dataset::new(vec![vec![0.0, 0.0], vec![0.5, -1.5]], b).unwrap_err();
        assert!(matches!(err, Error::OutOfDomain { row: 2, column: 2, .. }));
        let ok = Dataset::clipped(vec![vec![0.5, -1.5]], b).unwrap();
        assert_eq!(ok.points()[0], vec![0.5, -1.0]);
    }

    #[test]
    fn budget_must_be_positive() {
        assert!(PrivacyBudget::new(0.0_f64).is_err());
        assert!(PrivacyBudget::new(f64::NAN).is_err());
        assert_eq!(PrivacyBudget::new(0.5_f32).unwrap().epsilon(), 0.5);
    }

    #[test]
    fn derived_seeds_differ_and_are_stable() {
        let base = RngSeed(7);
        assert_eq!(base.derive(3), base.derive(3));
        assert_ne!(base.derive(3), base.derive(4));
        assert_eq!(base.derive_path(&[1, 2]), base.derive(1).derive(2));
    }
}
