//! Scoring centroids against raw data with the average within-cluster sum of squares.

use crate::error::{Error, Result};
use crate::scalar::{nearest, Real};
use crate::types::{ClusterModel, Dataset};

/// Assigns each point to its nearest centroid (lowest index on ties) and
/// scores the centroids as given. Centroids are not re-centred; empty
/// clusters contribute zero.
pub fn evaluate_wcss<T: Real>(data: &Dataset<T>, centroids: &[Vec<T>]) -> Result<ClusterModel<T>> {
    if centroids.is_empty() {
        return Err(Error::InvalidParameter("at least one centroid is required".into()));
    }
    if let Some(c) = centroids.iter().find(|c| c.len() != data.dim()) {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: c.len(),
        });
    }
    let mut per_cluster = vec![T::zero(); centroids.len()];
    let mut assignment = Vec::with_capacity(data.len());
    for p in data.points() {
        let (i, d2) = nearest(p, centroids);
        per_cluster[i] = per_cluster[i] + d2;
        assignment.push(i);
    }
    Ok(ClusterModel::from_parts(centroids.to_vec(), per_cluster, assignment))
}
