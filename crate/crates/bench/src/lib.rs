//! Benchmark harness and command-line front end for `dpgridkm`.
//!
//! [`harness::run`] sweeps methods over (K, N, d, epsilon) cells on
//! synthetic data and [`tables`] writes the WCSS, grid-count and threshold
//! tables.

pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod pipeline;
pub mod tables;

pub use config::{DataCell, ExperimentConfig, Method, OutputFormat};
pub use error::{Error, Result};
pub use harness::{run, ExperimentResult, Report};
pub use pipeline::{run_method, MethodRun};
pub use tables::{emit_sizing_tables, emit_tables};
