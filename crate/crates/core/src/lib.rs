//! Differentially private K-means over uniform-grid histograms.
//!
//! The pipeline is non-interactive: the data domain `[-r, r]^d` is cut into
//! `m^d` equal cells, the cell counts are released once with Laplace noise,
//! and weighted Lloyd runs on the cell centres using the noisy counts as
//! weights. Everything after the release is post-processing.
//!
//! [`sizing`] chooses `m`, either by the refined bound-minimizing rule
//! ([`sizing::solve_rugnik`]) or the K-independent baseline
//! ([`sizing::eugkm`]). [`cluster`] also carries the non-private Lloyd
//! reference and the interactive DPLloyd baseline.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common case.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accounting;
pub mod cluster;
pub mod dataset;
pub mod error;
pub mod grid;
pub mod noise;
pub mod root;
pub mod scalar;
pub mod sizing;
pub mod synth;
pub mod types;
pub mod wcss;

pub use accounting::BudgetLedger;
pub use cluster::{
    dplloyd, nonprivate_kmeans, weighted_lloyd, DpLloydConfig, DpLloydOutput, LloydConfig,
    WeightedPointSet,
};
pub use dataset::{load_dataset, read_dataset, write_dataset};
pub use error::{Error, Result};
pub use grid::{build_grid, histogram, privatize, GridHistogram, HistogramDump, ReleasedHistogram, UniformGrid};
pub use noise::{privatize_counts, LaplaceSampler};
pub use scalar::Real;
pub use sizing::{
    deviation_bound, eugkm, make_params, solve_rugnik, theorem_bounds, theta_scaling, xi,
    DeviationBound, GridChoice, GridRounding, SizingMethod, SizingParams, TheoremBounds,
};
pub use synth::{generate, CenterPlacement, SynthConfig, SynthOutput};
pub use types::{ClusterModel, Dataset, DomainBounds, PrivacyBudget, RngSeed};
pub use wcss::evaluate_wcss;

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type DomainBounds64 = DomainBounds<f64>;
pub type DomainBounds32 = DomainBounds<f32>;
pub type PrivacyBudget64 = PrivacyBudget<f64>;
pub type ClusterModel64 = ClusterModel<f64>;
pub type ClusterModel32 = ClusterModel<f32>;
pub type SizingParams64 = SizingParams<f64>;
pub type SizingParams32 = SizingParams<f32>;
pub type GridChoice64 = GridChoice<f64>;
pub type UniformGrid64 = UniformGrid<f64>;
pub type GridHistogram64 = GridHistogram<f64>;
pub type WeightedPointSet64 = WeightedPointSet<f64>;
pub type LloydConfig64 = LloydConfig<f64>;
pub type DpLloydConfig64 = DpLloydConfig<f64>;
pub type SynthConfig64 = SynthConfig<f64>;
