//! Uniform partition of `[-r, r]^d` into `m^d` cells and histogram release.
//!
//! Cells are enumerated row-major over per-axis indices with the last axis
//! varying fastest. The upper boundary `x_j = r` belongs to the last cell on
//! each axis, so every in-domain point has exactly one cell.

use serde::{Deserialize, Serialize};

use crate::cluster::WeightedPointSet;
use crate::error::{Error, Result};
use crate::noise::privatize_counts;
use crate::scalar::Real;
use crate::types::{Dataset, DomainBounds, PrivacyBudget, RngSeed};

/// Largest number of cells a grid may have.
pub const MAX_CELLS: usize = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid<T> {
    bounds: DomainBounds<T>,
    m: usize,
    cells: usize,
    cell_width: T,
}

impl<T: Real> UniformGrid<T> {
    pub fn new(bounds: DomainBounds<T>, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("cells per axis must be at least 1".into()));
        }
        let d = bounds.d();
        let overflow = Error::Overflow {
            m,
            d,
            limit: MAX_CELLS,
        };
        let exp = u32::try_from(d).map_err(|_| Error::Overflow { m, d, limit: MAX_CELLS })?;
        let cells = m.checked_pow(exp).ok_or(overflow)?;
        if cells > MAX_CELLS {
            return Err(Error::Overflow {
                m,
                d,
                limit: MAX_CELLS,
            });
        }
        let cell_width = (bounds.r() + bounds.r()) / T::of_usize(m);
        Ok(Self {
            bounds,
            m,
            cells,
            cell_width,
        })
    }

    pub fn bounds(&self) -> DomainBounds<T> {
        self.bounds
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Total number of cells, `m^d`.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn cell_width(&self) -> T {
        self.cell_width
    }

    pub fn dim(&self) -> usize {
        self.bounds.d()
    }

    /// Per-axis indices of cell `j`.
    pub fn axis_indices(&self, mut j: usize) -> Vec<usize> {
        let d = self.dim();
        let mut idx = vec![0; d];
        for slot in idx.iter_mut().rev() {
            *slot = j % self.m;
            j /= self.m;
        }
        idx
    }

    /// Centre of cell `j`: `-r + (i + 1/2) * (2r/m)` on every axis.
    pub fn center(&self, j: usize) -> Vec<T> {
        let half = T::of(0.5);
        self.axis_indices(j)
            .into_iter()
            .map(|i| -self.bounds.r() + (T::of_usize(i) + half) * self.cell_width)
            .collect()
    }

    pub fn centers(&self) -> Vec<Vec<T>> {
        (0..self.cells).map(|j| self.center(j)).collect()
    }

    pub fn cell_index(&self, x: &[T]) -> Result<usize> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let r = self.bounds.r();
        let mut flat = 0usize;
        for (axis, &v) in x.iter().enumerate() {
            if !(v >= -r && v <= r) {
                return Err(Error::PointOutOfDomain {
                    axis,
                    value: v.as_f64(),
                    r: r.as_f64(),
                });
            }
            let i = ((v + r) / self.cell_width)
                .floor()
                .to_usize()
                .unwrap_or(0)
                .min(self.m - 1);
            flat = flat * self.m + i;
        }
        Ok(flat)
    }
}

/// Builds the uniform grid with `m` cells per axis.
pub fn build_grid<T: Real>(bounds: DomainBounds<T>, m: usize) -> Result<UniformGrid<T>> {
    UniformGrid::new(bounds, m)
}

/// Dense per-cell counts, optionally with a one-shot privatized copy.
#[derive(Debug, Clone, PartialEq)]
pub struct GridHistogram<T> {
    grid: UniformGrid<T>,
    true_counts: Vec<u64>,
    noisy_counts: Option<Vec<T>>,
    epsilon_spent: Option<T>,
}

/// Exact histogram of `data` over `grid`.
pub fn histogram<T: Real>(data: &Dataset<T>, grid: &UniformGrid<T>) -> Result<GridHistogram<T>> {
    if data.bounds() != grid.bounds() {
        return Err(Error::BoundsMismatch);
    }
    let mut counts = vec![0u64; grid.cells()];
    for p in data.points() {
        counts[grid.cell_index(p)?] += 1;
    }
    Ok(GridHistogram {
        grid: *grid,
        true_counts: counts,
        noisy_counts: None,
        epsilon_spent: None,
    })
}

impl<T: Real> GridHistogram<T> {
    pub fn grid(&self) -> &UniformGrid<T> {
        &self.grid
    }

    pub fn true_counts(&self) -> &[u64] {
        &self.true_counts
    }

    pub fn noisy_counts(&self) -> Option<&[T]> {
        self.noisy_counts.as_deref()
    }

    pub fn epsilon_spent(&self) -> Option<T> {
        self.epsilon_spent
    }

    pub fn total(&self) -> u64 {
        self.true_counts.iter().sum()
    }

    pub fn is_privatized(&self) -> bool {
        self.noisy_counts.is_some()
    }

    /// Adds `Laplace(0, 1/epsilon)` to every cell, including empty ones.
    /// Consumes the histogram; a privatized histogram refuses a second call.
    pub fn privatize(self, budget: PrivacyBudget<T>, seed: RngSeed) -> Result<GridHistogram<T>> {
        privatize(self, budget, seed)
    }

    /// The releasable synopsis: grid geometry plus noisy counts only.
    pub fn release(&self) -> Option<ReleasedHistogram<T>> {
        Some(ReleasedHistogram {
            grid: self.grid,
            noisy_counts: self.noisy_counts.clone()?,
            epsilon_spent: self.epsilon_spent?,
        })
    }

    /// JSON dump; true counts are omitted once noisy counts exist.
    pub fn to_dump(&self) -> HistogramDump<T> {
        HistogramDump {
            m: self.grid.m(),
            d: self.grid.dim(),
            r: self.grid.bounds().r(),
            true_counts: if self.is_privatized() {
                None
            } else {
                Some(self.true_counts.clone())
            },
            noisy_counts: self.noisy_counts.clone(),
            epsilon_spent: self.epsilon_spent,
        }
    }
}

/// Free-function form of [`GridHistogram::privatize`].
pub fn privatize<T: Real>(
    hist: GridHistogram<T>,
    budget: PrivacyBudget<T>,
    seed: RngSeed,
) -> Result<GridHistogram<T>> {
    if let Some(eps) = hist.epsilon_spent {
        return Err(Error::AlreadyPrivatized {
            epsilon: eps.as_f64(),
        });
    }
    let noisy = privatize_counts(&hist.true_counts, budget, seed);
    Ok(GridHistogram {
        noisy_counts: Some(noisy),
        epsilon_spent: Some(budget.epsilon()),
        ..hist
    })
}

/// Privatized synopsis with no path back to the raw data or true counts.
/// Everything computed from it is post-processing.
#[derive(Debug, Clone, PartialEq)]
pub struct ReleasedHistogram<T> {
    grid: UniformGrid<T>,
    noisy_counts: Vec<T>,
    epsilon_spent: T,
}

impl<T: Real> ReleasedHistogram<T> {
    pub fn grid(&self) -> &UniformGrid<T> {
        &self.grid
    }

    pub fn noisy_counts(&self) -> &[T] {
        &self.noisy_counts
    }

    pub fn epsilon_spent(&self) -> T {
        self.epsilon_spent
    }

    /// Cell centres weighted by noisy counts, the input to weighted Lloyd.
    pub fn weighted_points(&self) -> WeightedPointSet<T> {
        WeightedPointSet::new(self.grid.centers(), self.noisy_counts.clone())
            .expect("grid centres and counts have matching lengths")
    }

    pub fn to_dump(&self) -> HistogramDump<T> {
        HistogramDump {
            m: self.grid.m(),
            d: self.grid.dim(),
            r: self.grid.bounds().r(),
            true_counts: None,
            noisy_counts: Some(self.noisy_counts.clone()),
            epsilon_spent: Some(self.epsilon_spent),
        }
    }
}

/// Serialized histogram: `{m, d, r, true_counts?, noisy_counts?, epsilon_spent?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramDump<T> {
    pub m: usize,
    pub d: usize,
    pub r: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_counts: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noisy_counts: Option<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_spent: Option<T>,
}

impl<T: Real> HistogramDump<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("histogram dump serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse {
            row: e.line(),
            message: e.to_string(),
        })
    }

    /// Rebuilds a released histogram from a dump carrying noisy counts.
    pub fn into_released(self) -> Result<ReleasedHistogram<T>> {
        let grid = UniformGrid::new(DomainBounds::new(self.r, self.d)?, self.m)?;
        let (Some(noisy_counts), Some(epsilon_spent)) = (self.noisy_counts, self.epsilon_spent) else {
            return Err(Error::InvalidParameter("dump carries no noisy counts".into()));
        };
        if noisy_counts.len() != grid.cells() {
            return Err(Error::DimensionMismatch {
                expected: grid.cells(),
                found: noisy_counts.len(),
            });
        }
        Ok(ReleasedHistogram {
            grid,
            noisy_counts,
            epsilon_spent,
        })
    }
}
