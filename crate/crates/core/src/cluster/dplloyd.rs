use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::accounting::BudgetLedger;
use crate::error::{Error, Result};
use crate::noise::LaplaceSampler;
use crate::scalar::{nearest, Real};
use crate::types::{ClusterModel, Dataset, DomainBounds, RngSeed};
use crate::wcss::evaluate_wcss;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpLloydConfig<T> {
    pub k: usize,
    pub iterations: usize,
    pub total_epsilon: T,
    /// Share of each iteration's budget spent on the counts; the rest goes to the sums.
    pub count_fraction: T,
    pub seed: RngSeed,
    pub bounds: DomainBounds<T>,
}

impl<T: Real> DpLloydConfig<T> {
    /// Five iterations, budget split evenly between counts and sums.
    pub fn new(k: usize, total_epsilon: T, bounds: DomainBounds<T>, seed: RngSeed) -> Self {
        Self {
            k,
            iterations: 5,
            total_epsilon,
            count_fraction: T::of(0.5),
            seed,
            bounds,
        }
    }

    pub fn per_iteration_epsilon(&self) -> T {
        self.total_epsilon / T::of_usize(self.iterations)
    }

    /// Laplace scale for the per-cluster counts, `1 / (eps_t f)`.
    pub fn count_scale(&self) -> T {
        T::one() / (self.per_iteration_epsilon() * self.count_fraction)
    }

    /// Laplace scale for each coordinate sum, `d r / (eps_t (1 - f))`.
    ///
    /// One record moves the d coordinate sums of its cluster by at most `r`
    /// each, so the L1 sensitivity of the sum vector is `d r`.
    pub fn sum_scale(&self) -> T {
        let d = T::of_usize(self.bounds.d());
        d * self.bounds.r() / (self.per_iteration_epsilon() * (T::one() - self.count_fraction))
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.iterations == 0 {
            return Err(Error::InvalidParameter("K and iterations must be at least 1".into()));
        }
        if !(self.total_epsilon > T::zero()) || !self.total_epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "total epsilon must be positive and finite, got {}",
                self.total_epsilon
            )));
        }
        if !(self.count_fraction > T::zero() && self.count_fraction < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "count fraction must lie in (0, 1), got {}",
                self.count_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpLloydOutput<T> {
    /// Final centroids scored against the input data.
    pub model: ClusterModel<T>,
    pub ledger: BudgetLedger<T>,
    /// Centroids after each iteration.
    pub history: Vec<Vec<Vec<T>>>,
}

/// Initial centroids, uniform on `[-r, r]^d`, drawn from stream 0 of the seed.
pub fn dplloyd_initialization<T: Real>(cfg: &DpLloydConfig<T>) -> Vec<Vec<T>> {
    let mut rng = cfg.seed.derive(0).rng();
    let r = cfg.bounds.r().as_f64();
    (0..cfg.k)
        .map(|_| {
            (0..cfg.bounds.d())
                .map(|_| T::of(rng.random_range(-r..=r)))
                .collect()
        })
        .collect()
}

/// Interactive private Lloyd.
///
/// Each of T iterations assigns points to the nearest centroid and releases
/// per-cluster counts and coordinate sums with Laplace noise, spending
/// `total_epsilon / T` under sequential composition. The new centroid is
/// `noisy_sum / max(noisy_count, 1)`, clamped into the domain.
pub fn dplloyd<T: Real>(data: &Dataset<T>, cfg: &DpLloydConfig<T>) -> Result<DpLloydOutput<T>> {
    cfg.validate()?;
    if data.bounds() != cfg.bounds {
        return Err(Error::BoundsMismatch);
    }
    let d = data.dim();
    let eps_t = cfg.per_iteration_epsilon();
    let eps_counts = eps_t * cfg.count_fraction;
    let eps_sums = eps_t - eps_counts;
    let mut count_noise = LaplaceSampler::new(cfg.count_scale(), cfg.seed.derive(1))?;
    let mut sum_noise = LaplaceSampler::new(cfg.sum_scale(), cfg.seed.derive(2))?;

    let mut centroids = dplloyd_initialization(cfg);
    let mut ledger = BudgetLedger::new();
    let mut history = Vec::with_capacity(cfg.iterations);
    for t in 0..cfg.iterations {
        let mut counts = vec![0usize; cfg.k];
        let mut sums = vec![vec![T::zero(); d]; cfg.k];
        for p in data.points() {
            let i = nearest(p, &centroids).0;
            counts[i] += 1;
            for (s, &x) in sums[i].iter_mut().zip(p) {
                *s = *s + x;
            }
        }
        ledger.charge(format!("iteration {t}: counts"), eps_counts);
        ledger.charge(format!("iteration {t}: sums"), eps_sums);
        for i in 0..cfg.k {
            let noisy_count = T::of_usize(counts[i]) + count_noise.draw();
            let divisor = noisy_count.max(T::one());
            for (c, &s) in centroids[i].iter_mut().zip(&sums[i]) {
                *c = cfg.bounds.clamp((s + sum_noise.draw()) / divisor);
            }
        }
        history.push(centroids.clone());
    }
    Ok(DpLloydOutput {
        model: evaluate_wcss(data, &centroids)?,
        ledger,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> Dataset<f64> {
        let mut pts = Vec::new();
        for i in 0..50 {
            let t = i as f64 / 50.0;
            pts.push(vec![-0.6 + 0.1 * t, -0.5 + 0.05 * t]);
            pts.push(vec![0.6 - 0.1 * t, 0.5 - 0.05 * t]);
        }
        Dataset::new(pts, DomainBounds::new(1.0, 2).unwrap()).unwrap()
    }

    #[test]
    fn ledger_sums_to_total() {
        let data = blobs();
        let cfg = DpLloydConfig::new(2, 0.1, data.bounds(), RngSeed(3));
        let out = dplloyd(&data, &cfg).unwrap();
        assert_eq!(out.ledger.charges().len(), 10);
        assert!(out.ledger.matches(0.1), "{}", out.ledger.total());
        assert_eq!(out.history.len(), 5);
    }

    #[test]
    fn centroids_stay_in_domain() {
        let data = blobs();
        let cfg = DpLloydConfig::new(3, 0.05, data.bounds(), RngSeed(8));
        let out = dplloyd(&data, &cfg).unwrap();
        assert!(out.model.centroids.iter().all(|c| data.bounds().contains(c)));
    }

    #[test]
    fn deterministic() {
        let data = blobs();
        let cfg = DpLloydConfig::new(2, 1.0, data.bounds(), RngSeed(5));
        assert_eq!(dplloyd(&data, &cfg).unwrap(), dplloyd(&data, &cfg).unwrap());
    }

    #[test]
    fn rejects_bad_fraction() {
        let data = blobs();
        let mut cfg = DpLloydConfig::new(2, 1.0, data.bounds(), RngSeed(5));
        cfg.count_fraction = 1.0;
        assert!(dplloyd(&data, &cfg).is_err());
    }

    #[test]
    fn scales_follow_split() {
        let b = DomainBounds::new(2.0_f64, 3).unwrap();
        let cfg = DpLloydConfig::new(2, 1.0, b, RngSeed(0));
        assert!((cfg.count_scale() - 10.0).abs() < 1e-12);
        assert!((cfg.sum_scale() - 60.0).abs() < 1e-12);
    }
}
