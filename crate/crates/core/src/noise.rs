//! Continuous Laplace noise with a seeded, reproducible generator.
//!
//! Draws use the inverse CDF `z = -b * sign(u) * ln(1 - 2|u|)` with `u`
//! uniform on the open interval `(-1/2, 1/2)`. The uniform source is
//! ChaCha8 seeded through [`RngSeed`], so identical seeds give identical
//! noise on every platform.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::types::{PrivacyBudget, RngSeed};

/// Stateful sampler of i.i.d. `Laplace(0, scale)` variates.
#[derive(Debug, Clone)]
pub struct LaplaceSampler<T> {
    scale: T,
    rng: ChaCha8Rng,
}

impl<T: Real> LaplaceSampler<T> {
    pub fn new(scale: T, seed: RngSeed) -> Result<Self> {
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Laplace scale must be positive and finite, got {scale}"
            )));
        }
        Ok(Self {
            scale,
            rng: seed.rng(),
        })
    }

    /// Sampler calibrated for a sensitivity-1 query under `budget`.
    pub fn for_budget(budget: PrivacyBudget<T>, seed: RngSeed) -> Result<Self> {
        Self::new(T::one() / budget.epsilon(), seed)
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn draw(&mut self) -> T {
        T::of(laplace_f64(&mut self.rng, self.scale.as_f64()))
    }

    pub fn sample(&mut self, count: usize) -> Vec<T> {
        (0..count).map(|_| self.draw()).collect()
    }
}

/// One inverse-CDF Laplace draw of scale `b` from any uniform source.
pub fn laplace_f64<R: Rng + ?Sized>(rng: &mut R, b: f64) -> f64 {
    let u = loop {
        let u = rng.random::<f64>() - 0.5;
        if u > -0.5 {
            break u;
        }
    };
    -b * u.signum() * (-2.0 * u.abs()).ln_1p()
}

/// Adds i.i.d. `Laplace(0, 1/epsilon)` to each count. Results are left
/// unclamped and may be negative.
pub fn privatize_counts<T: Real>(
    true_counts: &[u64],
    budget: PrivacyBudget<T>,
    seed: RngSeed,
) -> Vec<T> {
    let mut sampler = LaplaceSampler::for_budget(budget, seed)
        .expect("a valid budget always yields a valid scale");
    true_counts
        .iter()
        .map(|&t| T::of(t as f64) + sampler.draw())
        .collect()
}
