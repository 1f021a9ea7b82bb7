use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dpgridkm::{CenterPlacement, RngSeed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rugnik,
    Eugkm,
    Dplloyd,
    Noprivacy,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Rugnik, Method::Eugkm, Method::Dplloyd, Method::Noprivacy];

    pub fn name(self) -> &'static str {
        match self {
            Method::Rugnik => "rugnik",
            Method::Eugkm => "eugkm",
            Method::Dplloyd => "dplloyd",
            Method::Noprivacy => "noprivacy",
        }
    }

    pub fn is_grid(self) -> bool {
        matches!(self, Method::Rugnik | Method::Eugkm)
    }

    pub fn is_private(self) -> bool {
        self != Method::Noprivacy
    }

    pub(crate) fn stream(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown method {s:?} (expected rugnik, eugkm, dplloyd or noprivacy)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// The nine (K, N) rows of the reference tables.
pub const PAPER_KN_PAIRS: [(usize, usize); 9] = [
    (2, 100),
    (2, 200),
    (2, 400),
    (4, 200),
    (4, 400),
    (4, 800),
    (8, 400),
    (8, 800),
    (8, 1600),
];

pub const PAPER_EPSILONS: [f64; 6] = [0.1, 0.15, 0.25, 0.4, 0.6, 1.0];

/// One benchmark sweep.
///
/// Data cells are `kn_pairs x ds` when `kn_pairs` is non-empty, otherwise
/// `ks x ns x ds`. Each data cell is crossed with every epsilon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub methods: Vec<Method>,
    pub ns: Vec<usize>,
    pub ds: Vec<usize>,
    pub ks: Vec<usize>,
    pub kn_pairs: Vec<(usize, usize)>,
    pub epsilons: Vec<f64>,
    pub trials: usize,
    pub base_seed: RngSeed,
    pub r: f64,
    pub cluster_std: Option<f64>,
    pub placement: CenterPlacement,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            ns: Vec::new(),
            ds: vec![2, 3],
            ks: Vec::new(),
            kn_pairs: PAPER_KN_PAIRS.to_vec(),
            epsilons: PAPER_EPSILONS.to_vec(),
            trials: 50,
            base_seed: RngSeed(0),
            r: 1.0,
            cluster_std: None,
            placement: CenterPlacement::Lattice,
            out_dir: PathBuf::from("results"),
            format: OutputFormat::Csv,
        }
    }
}

/// A (K, N, d) combination; every epsilon and method shares its datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DataCell {
    pub d: usize,
    pub k: usize,
    pub n: usize,
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.methods.is_empty() {
            return fail("method list is empty".into());
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.ds.is_empty() || self.epsilons.is_empty() {
            return fail("d and epsilon lists must be non-empty".into());
        }
        if self.kn_pairs.is_empty() && (self.ns.is_empty() || self.ks.is_empty()) {
            return fail("need either kn_pairs or both N and K lists".into());
        }
        if let Some(&d) = self.ds.iter().find(|&&d| d < 2) {
            return fail(format!("d = {d}: grid sizing needs d >= 2"));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return fail(format!("epsilon must be positive and finite, got {e}"));
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            return fail(format!("r must be positive and finite, got {}", self.r));
        }
        if let Some(s) = self.cluster_std {
            if !(s.is_finite() && s > 0.0) {
                return fail(format!("cluster std must be positive and finite, got {s}"));
            }
        }
        for c in self.data_cells() {
            if c.k == 0 || c.n < c.k {
                return fail(format!("need N >= K >= 1, got N = {}, K = {}", c.n, c.k));
            }
        }
        Ok(())
    }

    /// Data cells in sorted, duplicate-free order.
    pub fn data_cells(&self) -> Vec<DataCell> {
        let kn: Vec<(usize, usize)> = if self.kn_pairs.is_empty() {
            self.ks
                .iter()
                .flat_map(|&k| self.ns.iter().map(move |&n| (k, n)))
                .collect()
        } else {
            self.kn_pairs.clone()
        };
        let mut cells: Vec<DataCell> = self
            .ds
            .iter()
            .flat_map(|&d| kn.iter().map(move |&(k, n)| DataCell { d, k, n }))
            .collect();
        cells.sort();
        cells.dedup();
        cells
    }

    pub fn sorted_epsilons(&self) -> Vec<f64> {
        let mut e = self.epsilons.clone();
        e.sort_by(f64::total_cmp);
        e.dedup();
        e
    }

    pub fn sorted_methods(&self) -> Vec<Method> {
        let mut m = self.methods.clone();
        m.sort();
        m.dedup();
        m
    }
}

/// Seed of trial `t` in data cell `c`. Keyed on the cell's values rather
/// than its position, so a cell reproduces across differently shaped sweeps.
pub fn trial_seed(base: RngSeed, cell: DataCell, trial: usize) -> RngSeed {
    base.derive_path(&[cell.n as u64, cell.d as u64, cell.k as u64, trial as u64])
}
