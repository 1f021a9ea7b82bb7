use rand::Rng;

use super::{LloydConfig, WeightedPointSet};
use crate::error::{Error, Result};
use crate::scalar::{nearest, sq_dist, Real};
use crate::types::{ClusterModel, Dataset};

/// Objective history of one restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartTrace<T> {
    /// `(1/K) sum_j w_j min_i ||s_j - c_i||^2` for the initial centroids and
    /// after every update.
    pub objectives: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LloydRun<T> {
    pub model: ClusterModel<T>,
    pub best_restart: usize,
    pub restarts: Vec<RestartTrace<T>>,
}

/// Weighted Lloyd on grid centres with noisy counts as weights.
///
/// Each restart seeds with weighted k-means++ and alternates assignment and
/// weighted re-centring. A centroid left with zero assigned mass moves to the
/// cell maximizing `w * D^2`. The restart with the smallest weighted
/// objective wins, ties to the lowest restart index.
pub fn weighted_lloyd<T: Real>(wps: &WeightedPointSet<T>, cfg: &LloydConfig<T>) -> Result<ClusterModel<T>> {
    weighted_lloyd_traced(wps, cfg).map(|run| run.model)
}

pub fn weighted_lloyd_traced<T: Real>(
    wps: &WeightedPointSet<T>,
    cfg: &LloydConfig<T>,
) -> Result<LloydRun<T>> {
    cfg.validate()?;
    if cfg.k > wps.len() {
        return Err(Error::KExceedsDistinctPoints {
            k: cfg.k,
            m: wps.len(),
        });
    }
    let weights = wps.effective_weights();
    if !weights.iter().any(|&w| w > T::zero()) {
        return Err(Error::AllWeightsNonPositive);
    }
    Ok(run_restarts(wps.points(), &weights, cfg))
}

/// Standard Lloyd with k-means++ seeding on raw points (unit weights).
pub fn nonprivate_kmeans<T: Real>(data: &Dataset<T>, cfg: &LloydConfig<T>) -> Result<ClusterModel<T>> {
    nonprivate_kmeans_traced(data, cfg).map(|run| run.model)
}

pub fn nonprivate_kmeans_traced<T: Real>(data: &Dataset<T>, cfg: &LloydConfig<T>) -> Result<LloydRun<T>> {
    cfg.validate()?;
    if cfg.k > data.len() {
        return Err(Error::KExceedsN {
            k: cfg.k,
            n: data.len(),
        });
    }
    let weights = vec![T::one(); data.len()];
    Ok(run_restarts(data.points(), &weights, cfg))
}

fn run_restarts<T: Real>(points: &[Vec<T>], weights: &[T], cfg: &LloydConfig<T>) -> LloydRun<T> {
    let mut best: Option<(usize, ClusterModel<T>)> = None;
    let mut traces = Vec::with_capacity(cfg.restarts);
    for restart in 0..cfg.restarts {
        let mut rng = cfg.seed.derive(restart as u64).rng();
        let init = kmeans_pp(points, weights, cfg.k, &mut rng);
        let (model, trace) = lloyd_from(points, weights, init, cfg);
        traces.push(trace);
        let better = match &best {
            None => true,
            Some((_, b)) => model.objective < b.objective,
        };
        if better {
            best = Some((restart, model));
        }
    }
    let (best_restart, model) = best.expect("at least one restart");
    LloydRun {
        model,
        best_restart,
        restarts: traces,
    }
}

/// Draws an index with probability proportional to `scores`; `None` if all are zero.
fn sample_proportional<T: Real, R: Rng + ?Sized>(scores: &[T], rng: &mut R) -> Option<usize> {
    let total: T = scores.iter().copied().sum();
    if !(total > T::zero()) {
        return None;
    }
    let target = T::of(rng.random::<f64>()) * total;
    let mut acc = T::zero();
    let mut last_positive = None;
    for (j, &s) in scores.iter().enumerate() {
        if s > T::zero() {
            acc = acc + s;
            last_positive = Some(j);
            if target < acc {
                return Some(j);
            }
        }
    }
    last_positive
}

/// Weighted k-means++: first centre proportional to `w`, then to `w * D^2`.
fn kmeans_pp<T: Real, R: Rng + ?Sized>(points: &[Vec<T>], weights: &[T], k: usize, rng: &mut R) -> Vec<Vec<T>> {
    let first = sample_proportional(weights, rng).unwrap_or(0);
    let mut chosen = vec![first];
    let mut d2: Vec<T> = points.iter().map(|p| sq_dist(p, &points[first])).collect();
    while chosen.len() < k {
        let scores: Vec<T> = weights.iter().zip(&d2).map(|(&w, &d)| w * d).collect();
        let next = sample_proportional(&scores, rng)
            .or_else(|| (0..points.len()).find(|j| !chosen.contains(j)))
            .unwrap_or(0);
        chosen.push(next);
        for (dj, p) in d2.iter_mut().zip(points) {
            let d = sq_dist(p, &points[next]);
            if d < *dj {
                *dj = d;
            }
        }
    }
    chosen.into_iter().map(|j| points[j].clone()).collect()
}

fn weighted_objective<T: Real>(points: &[Vec<T>], weights: &[T], centroids: &[Vec<T>]) -> T {
    let total: T = points
        .iter()
        .zip(weights)
        .map(|(p, &w)| w * nearest(p, centroids).1)
        .sum();
    total / T::of_usize(centroids.len())
}

fn lloyd_from<T: Real>(
    points: &[Vec<T>],
    weights: &[T],
    mut centroids: Vec<Vec<T>>,
    cfg: &LloydConfig<T>,
) -> (ClusterModel<T>, RestartTrace<T>) {
    let k = centroids.len();
    let dim = centroids[0].len();
    let mut objectives = vec![weighted_objective(points, weights, &centroids)];
    let mut converged = false;
    let mut iterations = 0;
    let mut assignment = vec![0usize; points.len()];

    while iterations < cfg.max_iterations {
        iterations += 1;
        for (a, p) in assignment.iter_mut().zip(points) {
            *a = nearest(p, &centroids).0;
        }
        let mut mass = vec![T::zero(); k];
        let mut sums = vec![vec![T::zero(); dim]; k];
        for ((p, &w), &a) in points.iter().zip(weights).zip(&assignment) {
            if w > T::zero() {
                mass[a] = mass[a] + w;
                for (s, &x) in sums[a].iter_mut().zip(p) {
                    *s = *s + w * x;
                }
            }
        }
        let mut updated: Vec<Vec<T>> = (0..k)
            .map(|i| {
                if mass[i] > T::zero() {
                    sums[i].iter().map(|&s| s / mass[i]).collect()
                } else {
                    centroids[i].clone()
                }
            })
            .collect();
        for i in (0..k).filter(|&i| !(mass[i] > T::zero())) {
            if let Some(j) = farthest_mass(points, weights, &updated, &mass, i) {
                updated[i] = points[j].clone();
            }
        }
        let shift = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(T::zero(), T::max);
        centroids = updated;
        objectives.push(weighted_objective(points, weights, &centroids));
        if shift <= cfg.tolerance {
            converged = true;
            break;
        }
    }

    let mut per_cluster = vec![T::zero(); k];
    for ((a, p), &w) in assignment.iter_mut().zip(points).zip(weights) {
        let (i, d2) = nearest(p, &centroids);
        *a = i;
        per_cluster[i] = per_cluster[i] + w * d2;
    }
    (
        ClusterModel::from_parts(centroids, per_cluster, assignment),
        RestartTrace {
            objectives,
            iterations,
            converged,
        },
    )
}

/// Cell maximizing `w * D^2` against the centroids that currently hold mass
/// (and any already re-seeded), lowest index on ties.
fn farthest_mass<T: Real>(
    points: &[Vec<T>],
    weights: &[T],
    centroids: &[Vec<T>],
    mass: &[T],
    skip: usize,
) -> Option<usize> {
    let anchors: Vec<Vec<T>> = centroids
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != skip && (mass[i] > T::zero() || i < skip))
        .map(|(_, c)| c.clone())
        .collect();
    if anchors.is_empty() {
        return None;
    }
    let mut best = None;
    let mut best_score = T::zero();
    for (j, (p, &w)) in points.iter().zip(weights).enumerate() {
        let score = w * nearest(p, &anchors).1;
        if score > best_score {
            best_score = score;
            best = Some(j);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{DomainBounds, RngSeed};

    fn cfg(k: usize, seed: u64) -> LloydConfig<f64> {
        LloydConfig::new(k, RngSeed(seed))
    }

    #[test]
    fn exact_cover_of_square() {
        let pts = vec![vec![-1., -1.], vec![-1., 1.], vec![1., -1.], vec![1., 1.]];
        let wps = WeightedPointSet::new(pts.clone(), vec![3.0; 4]).unwrap();
        let m = weighted_lloyd(&wps, &cfg(4, 1)).unwrap();
        assert_eq!(m.objective, 0.0);
        let mut got = m.centroids.clone();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, pts);
    }

    #[test]
    fn single_mass() {
        let pts = vec![vec![0., 0.], vec![0.5, 0.5], vec![-0.5, 0.25]];
        let wps = WeightedPointSet::new(pts, vec![0.0, 4.0, -2.0]).unwrap();
        let m = weighted_lloyd(&wps, &cfg(1, 0)).unwrap();
        assert_eq!(m.centroids[0], vec![0.5, 0.5]);
    }

    #[test]
    fn k_one_is_weighted_mean() {
        let pts = vec![vec![0., 0.], vec![1., 0.], vec![0., 2.]];
        let w = vec![1.0, 2.0, 3.0];
        let m = weighted_lloyd(&WeightedPointSet::new(pts, w).unwrap(), &cfg(1, 3)).unwrap();
        assert!((m.centroids[0][0] - 2.0 / 6.0).abs() < 1e-12);
        assert!((m.centroids[0][1] - 6.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn weight_and_k_errors() {
        let pts = vec![vec![0., 0.], vec![1., 0.]];
        let neg = WeightedPointSet::new(pts.clone(), vec![-1.0, 0.0]).unwrap();
        assert!(matches!(weighted_lloyd(&neg, &cfg(1, 0)), Err(Error::AllWeightsNonPositive)));
        let ok = WeightedPointSet::new(pts, vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            weighted_lloyd(&ok, &cfg(3, 0)),
            Err(Error::KExceedsDistinctPoints { k: 3, m: 2 })
        ));
        assert!(WeightedPointSet::new(vec![vec![0.0]], vec![]).is_err());
    }

    #[test]
    fn zero_weight_cells_are_assignable() {
        // K=2 with one massive cell: the second centroid lands on a zero-mass
        // cell or is re-seeded, never producing NaN
        let pts = vec![vec![0., 0.], vec![1., 1.], vec![-1., 1.]];
        let wps = WeightedPointSet::new(pts, vec![5.0, 0.0, 0.0]).unwrap();
        let m = weighted_lloyd(&wps, &cfg(2, 9)).unwrap();
        assert!(m.centroids.iter().flatten().all(|v| v.is_finite()));
        assert_eq!(m.objective, 0.0);
    }

    #[test]
    fn separable_pairs() {
        let b = DomainBounds::new(10.0, 2).unwrap();
        let data = Dataset::new(vec![vec![-5., 0.], vec![-5., 2.], vec![5., 0.], vec![5., 2.]], b).unwrap();
        let m = nonprivate_kmeans(&data, &cfg(2, 4)).unwrap();
        let mut c = m.centroids.clone();
        c.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(c, vec![vec![-5., 1.], vec![5., 1.]]);
    }

    #[test]
    fn k_equals_n() {
        let b = DomainBounds::new(1.0, 2).unwrap();
        let data = Dataset::new(vec![vec![0.1, 0.2], vec![-0.3, 0.4], vec![0.9, -0.9]], b).unwrap();
        assert_eq!(nonprivate_kmeans(&data, &cfg(3, 2)).unwrap().objective, 0.0);
        assert!(matches!(nonprivate_kmeans(&data, &cfg(4, 2)), Err(Error::KExceedsN { k: 4, n: 3 })));
    }

    #[test]
    fn scale_equivariance_exact() {
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![((i * 37) % 19) as f64 / 19.0 - 0.5, ((i * 11) % 23) as f64 / 23.0 - 0.5])
            .collect();
        let scaled: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|v| v * 4.0).collect()).collect();
        let a = Dataset::new(pts, DomainBounds::new(1.0, 2).unwrap()).unwrap();
        let b = Dataset::new(scaled, DomainBounds::new(4.0, 2).unwrap()).unwrap();
        let ma = nonprivate_kmeans(&a, &cfg(3, 17)).unwrap();
        let mb = nonprivate_kmeans(&b, &cfg(3, 17)).unwrap();
        assert_eq!(mb.objective, 16.0 * ma.objective);
    }

    #[test]
    fn f32_weighted_lloyd() {
        let pts = vec![vec![-0.5_f32, -0.5], vec![0.5, 0.5], vec![0.5, -0.5]];
        let wps = WeightedPointSet::new(pts, vec![2.0, 2.0, 2.0]).unwrap();
        let m = weighted_lloyd(&wps, &LloydConfig::new(3, RngSeed(1))).unwrap();
        assert_eq!(m.objective, 0.0);
    }
}
