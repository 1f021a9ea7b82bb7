//! Seeded generator of K equal-size Gaussian blobs inside `[-r, r]^d`.
//!
//! By default cluster centres sit at the centres of the first K cells of a
//! `ceil(K^(1/d))`-per-axis partition of the domain, in a seed-dependent
//! order. [`CenterPlacement::Random`] instead draws them uniformly, keeping
//! them `6 * std` apart and `3 * std` inside the boundary. Points are
//! isotropic Gaussian around their centre and are redrawn until they fall
//! inside the domain.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::scalar::{sq_dist, Real};
use crate::types::{Dataset, DomainBounds, RngSeed};

/// Per-point cap on rejection redraws.
pub const MAX_REDRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterPlacement {
    /// Cell centres of a uniform partition. A grid whose resolution is a
    /// multiple of the partition's puts its cell centres on the true centres.
    #[default]
    Lattice,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig<T> {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub r: T,
    /// `None` selects `0.08 * 2r / K^(1/d)`.
    pub cluster_std: Option<T>,
    #[serde(default)]
    pub placement: CenterPlacement,
    pub seed: RngSeed,
}

impl<T: Real> SynthConfig<T> {
    pub fn new(n: usize, d: usize, k: usize, seed: RngSeed) -> Self {
        Self {
            n,
            d,
            k,
            r: T::one(),
            cluster_std: None,
            placement: CenterPlacement::Lattice,
            seed,
        }
    }

    pub fn default_std(r: T, d: usize, k: usize) -> T {
        T::of(0.08) * (r + r) / T::of_usize(k).powf(T::one() / T::of_usize(d))
    }

    pub fn std(&self) -> T {
        self.cluster_std
            .unwrap_or_else(|| Self::default_std(self.r, self.d, self.k))
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n < self.k {
            return Err(Error::InvalidParameter(format!(
                "need N >= K >= 1, got N = {}, K = {}",
                self.n, self.k
            )));
        }
        if !(self.std() > T::zero()) {
            return Err(Error::InvalidParameter("cluster std must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput<T> {
    pub dataset: Dataset<T>,
    pub true_centroids: Vec<Vec<T>>,
    /// Generating cluster of each point.
    pub labels: Vec<usize>,
}

/// JSON sidecar written next to a generated CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSidecar<T> {
    pub config: SynthConfig<T>,
    pub cluster_std: T,
    pub true_centroids: Vec<Vec<T>>,
}

impl<T: Real> SynthOutput<T> {
    pub fn sidecar(&self, config: &SynthConfig<T>) -> SynthSidecar<T> {
        SynthSidecar {
            config: *config,
            cluster_std: config.std(),
            true_centroids: self.true_centroids.clone(),
        }
    }
}

/// Smallest `q` with `q^d >= k`.
fn per_axis(k: usize, d: usize) -> usize {
    let mut q = 1usize;
    while (q as u128).pow(d as u32) < k as u128 {
        q += 1;
    }
    q
}

pub fn generate<T: Real>(cfg: &SynthConfig<T>) -> Result<SynthOutput<T>> {
    cfg.validate()?;
    let bounds = DomainBounds::new(cfg.r, cfg.d)?;
    let std = cfg.std();
    let centers = match cfg.placement {
        CenterPlacement::Lattice => {
            let layout = UniformGrid::new(bounds, per_axis(cfg.k, cfg.d))?;
            let mut centers: Vec<Vec<T>> = (0..cfg.k).map(|j| layout.center(j)).collect();
            centers.shuffle(&mut cfg.seed.derive(0).rng());
            centers
        }
        CenterPlacement::Random => random_centers(cfg, std)?,
    };

    if cfg.k > 1 {
        let mut min_d2 = T::infinity();
        for (i, a) in centers.iter().enumerate() {
            for b in &centers[i + 1..] {
                min_d2 = min_d2.min(sq_dist(a, b));
            }
        }
        let required = T::of(6.0) * std;
        if min_d2.sqrt() < required {
            return Err(Error::InsufficientSeparation {
                min_distance: min_d2.sqrt().as_f64(),
                required: required.as_f64(),
            });
        }
    }

    let base = cfg.n / cfg.k;
    let extra = cfg.n % cfg.k;
    let std64 = std.as_f64();
    let mut points = Vec::with_capacity(cfg.n);
    let mut labels = Vec::with_capacity(cfg.n);
    for (i, center) in centers.iter().enumerate() {
        let size = base + usize::from(i < extra);
        let mut rng = cfg.seed.derive(1 + i as u64).rng();
        for _ in 0..size {
            points.push(draw_in_domain(&mut rng, center, std64, &bounds)?);
            labels.push(i);
        }
    }
    Ok(SynthOutput {
        dataset: Dataset::new(points, bounds)?,
        true_centroids: centers,
        labels,
    })
}

fn random_centers<T: Real>(cfg: &SynthConfig<T>, std: T) -> Result<Vec<Vec<T>>> {
    let reach = (cfg.r - T::of(3.0) * std).as_f64();
    if !(reach > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cluster std {std} leaves no room for centres inside r = {}",
            cfg.r
        )));
    }
    let min_d2 = (T::of(6.0) * std).powi(2);
    let mut rng = cfg.seed.derive(0).rng();
    let mut centers: Vec<Vec<T>> = Vec::with_capacity(cfg.k);
    while centers.len() < cfg.k {
        let mut placed = false;
        for _ in 0..MAX_REDRAWS {
            let c: Vec<T> = (0..cfg.d).map(|_| T::of(rng.random_range(-reach..=reach))).collect();
            if centers.iter().all(|o| sq_dist(o, &c) >= min_d2) {
                centers.push(c);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::RejectionExhausted {
                attempts: MAX_REDRAWS,
            });
        }
    }
    Ok(centers)
}

fn draw_in_domain<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    center: &[T],
    std: f64,
    bounds: &DomainBounds<T>,
) -> Result<Vec<T>> {
    for _ in 0..MAX_REDRAWS {
        let p: Vec<T> = center
            .iter()
            .map(|&c| T::of(c.as_f64() + std * rng.sample::<f64, _>(StandardNormal)))
            .collect();
        if bounds.contains(&p) {
            return Ok(p);
        }
    }
    Err(Error::RejectionExhausted {
        attempts: MAX_REDRAWS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_axis_is_integer_ceiling_root() {
        assert_eq!(per_axis(1, 2), 1);
        assert_eq!(per_axis(2, 2), 2);
        assert_eq!(per_axis(4, 2), 2);
        assert_eq!(per_axis(8, 2), 3);
        assert_eq!(per_axis(8, 3), 2);
        assert_eq!(per_axis(9, 3), 3);
    }

    #[test]
    fn degenerate_spread() {
        let mut cfg = SynthConfig::<f64>::new(50, 2, 1, RngSeed(1));
        cfg.cluster_std = Some(1e-9);
        let out = generate(&cfg).unwrap();
        let c = &out.true_centroids[0];
        assert!(out.dataset.points().iter().all(|p| sq_dist(p, c).sqrt() < 1e-6));
    }

    #[test]
    fn equal_sizes_with_remainder() {
        let out = generate(&SynthConfig::<f64>::new(402, 2, 4, RngSeed(2))).unwrap();
        let mut sizes = [0usize; 4];
        for &l in &out.labels {
            sizes[l] += 1;
        }
        assert_eq!(sizes, [101, 101, 100, 100]);
    }

    #[test]
    fn deterministic_and_in_domain() {
        let cfg = SynthConfig::<f64>::new(300, 3, 8, RngSeed(4));
        let a = generate(&cfg).unwrap();
        assert_eq!(a, generate(&cfg).unwrap());
        let b = a.dataset.bounds();
        assert!(a.dataset.points().iter().all(|p| b.contains(p)));
    }

    #[test]
    fn overlapping_std_is_rejected() {
        let mut cfg = SynthConfig::<f64>::new(100, 2, 4, RngSeed(0));
        cfg.cluster_std = Some(0.5);
        assert!(matches!(generate(&cfg), Err(Error::InsufficientSeparation { .. })));
        cfg.k = 0;
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn random_placement_respects_margins() {
        let mut cfg = SynthConfig::<f64>::new(400, 2, 8, RngSeed(6));
        cfg.placement = CenterPlacement::Random;
        let out = generate(&cfg).unwrap();
        let std = cfg.std();
        for (i, a) in out.true_centroids.iter().enumerate() {
            assert!(a.iter().all(|v| v.abs() <= 1.0 - 3.0 * std));
            for b in &out.true_centroids[i + 1..] {
                assert!(sq_dist(a, b).sqrt() >= 6.0 * std);
            }
        }
        assert_eq!(out, generate(&cfg).unwrap());
        cfg.cluster_std = Some(0.3);
        assert!(matches!(generate(&cfg), Err(Error::RejectionExhausted { .. })));
    }

    #[test]
    fn default_std_separation_holds_widely() {
        for d in 2..=5 {
            for k in 1..=40 {
                let cfg = SynthConfig::<f64>::new(k, d, k, RngSeed(k as u64));
                generate(&cfg).unwrap_or_else(|e| panic!("d={d} k={k}: {e}"));
            }
        }
    }
}
