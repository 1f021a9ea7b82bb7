use std::time::Instant;

use dpgridkm::{generate, Dataset, RngSeed, SynthConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{trial_seed, DataCell, ExperimentConfig, Method};
use crate::error::Result;
use crate::pipeline::{run_method, MethodRun};

/// Aggregate over all trials of one (method, cell, epsilon).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub method: Method,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub epsilon: f64,
    /// Grid methods only.
    pub m_continuous: Option<f64>,
    pub m: Option<usize>,
    pub cells: Option<usize>,
    pub mean_wcss: f64,
    pub std_wcss: f64,
    pub trials: usize,
    pub degenerate: bool,
    pub unit_weight_fallbacks: usize,
    /// Budget spent by each trial, audited against `epsilon`.
    pub epsilon_spent: Option<f64>,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub results: Vec<ExperimentResult>,
}

impl Report {
    pub fn find(&self, method: Method, cell: DataCell, epsilon: f64) -> Option<&ExperimentResult> {
        self.results.iter().find(|r| {
            r.method == method && r.n == cell.n && r.d == cell.d && r.k == cell.k && r.epsilon == epsilon
        })
    }
}

struct Outcome {
    run: MethodRun,
    secs: f64,
}

/// Runs of one (cell, trial): the epsilon-free baseline plus each
/// (epsilon, private method) in config order.
struct TrialRuns {
    baseline: Option<Outcome>,
    private: Vec<Vec<Outcome>>,
}

pub fn synth_for(cfg: &ExperimentConfig, cell: DataCell, seed: RngSeed) -> SynthConfig<f64> {
    SynthConfig {
        n: cell.n,
        d: cell.d,
        k: cell.k,
        r: cfg.r,
        cluster_std: cfg.cluster_std,
        placement: cfg.placement,
        seed,
    }
}

fn timed(method: Method, data: &Dataset<f64>, k: usize, epsilon: f64, seed: RngSeed) -> Result<Outcome> {
    let start = Instant::now();
    let run = run_method(method, data, k, epsilon, seed)?;
    Ok(Outcome {
        run,
        secs: start.elapsed().as_secs_f64(),
    })
}

fn run_trial(cfg: &ExperimentConfig, cell: DataCell, trial: usize, epsilons: &[f64], private: &[Method], baseline: bool) -> Result<TrialRuns> {
    let seed = trial_seed(cfg.base_seed, cell, trial);
    let data = generate(&synth_for(cfg, cell, seed.derive(0)))?.dataset;
    let baseline = if baseline {
        let m = Method::Noprivacy;
        Some(timed(m, &data, cell.k, f64::NAN, seed.derive(m.stream()))?)
    } else {
        None
    };
    let private = epsilons
        .iter()
        .map(|&eps| {
            private
                .iter()
                .map(|&m| timed(m, &data, cell.k, eps, seed.derive_path(&[m.stream(), eps.to_bits()])))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialRuns { baseline, private })
}

fn aggregate(method: Method, cell: DataCell, epsilon: f64, outcomes: &[&Outcome]) -> ExperimentResult {
    let values: Vec<f64> = outcomes.iter().map(|o| o.run.model.objective).collect();
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
    } else {
        0.0
    };
    let grid = outcomes[0].run.grid;
    ExperimentResult {
        method,
        n: cell.n,
        d: cell.d,
        k: cell.k,
        epsilon,
        m_continuous: grid.map(|g| g.m_continuous),
        m: grid.map(|g| g.m),
        cells: grid.map(|g| g.cells),
        mean_wcss: mean,
        std_wcss: std,
        trials: values.len(),
        degenerate: outcomes.iter().any(|o| o.run.degenerate),
        unit_weight_fallbacks: outcomes.iter().filter(|o| o.run.unit_weight_fallback).count(),
        epsilon_spent: outcomes[0].run.epsilon_spent,
        wall_time_secs: outcomes.iter().map(|o| o.secs).sum(),
    }
}

/// Runs the sweep. Units of work are (data cell, trial) pairs executed on
/// the rayon pool; every method in a unit sees the same generated dataset.
/// Results are sorted by (d, K, N, method, epsilon).
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let cells = cfg.data_cells();
    let epsilons = cfg.sorted_epsilons();
    let methods = cfg.sorted_methods();
    let private: Vec<Method> = methods.iter().copied().filter(|m| m.is_private()).collect();
    let baseline = methods.contains(&Method::Noprivacy);

    let units: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let runs: Vec<TrialRuns> = units
        .par_iter()
        .map(|&(c, t)| run_trial(cfg, cells[c], t, &epsilons, &private, baseline))
        .collect::<Result<_>>()?;

    let mut results = Vec::new();
    for (c, &cell) in cells.iter().enumerate() {
        let trials = &runs[c * cfg.trials..(c + 1) * cfg.trials];
        for &method in &methods {
            for (e, &eps) in epsilons.iter().enumerate() {
                let outcomes: Vec<&Outcome> = match private.iter().position(|&m| m == method) {
                    Some(i) => trials.iter().map(|tr| &tr.private[e][i]).collect(),
                    None => trials.iter().filter_map(|tr| tr.baseline.as_ref()).collect(),
                };
                results.push(aggregate(method, cell, eps, &outcomes));
            }
        }
    }
    Ok(Report {
        config: cfg.clone(),
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            methods: vec![Method::Noprivacy],
            kn_pairs: vec![(2, 100)],
            ds: vec![2],
            epsilons: vec![0.5],
            trials: 3,
            ..Default::default()
        }
    }

    #[test]
    fn single_cell_bookkeeping() {
        let report = run(&small()).unwrap();
        assert_eq!(report.results.len(), 1);
        let r = &report.results[0];
        assert_eq!(r.trials, 3);
        assert!(r.std_wcss > 0.0);
        assert_eq!(r.cells, None);
    }

    #[test]
    fn deterministic_modulo_timing() {
        let mut cfg = small();
        cfg.methods = Method::ALL.to_vec();
        let strip = |mut r: Report| {
            r.results.iter_mut().for_each(|x| x.wall_time_secs = 0.0);
            r
        };
        assert_eq!(strip(run(&cfg).unwrap()), strip(run(&cfg).unwrap()));
    }

    #[test]
    fn results_are_sorted_and_complete() {
        let cfg = ExperimentConfig {
            methods: vec![Method::Eugkm, Method::Rugnik],
            kn_pairs: vec![(4, 200), (2, 100)],
            ds: vec![3, 2],
            epsilons: vec![1.0, 0.1],
            trials: 1,
            ..Default::default()
        };
        let report = run(&cfg).unwrap();
        assert_eq!(report.results.len(), 2 * 2 * 2 * 2);
        let keys: Vec<_> = report
            .results
            .iter()
            .map(|r| (r.d, r.k, r.n, r.method, r.epsilon.to_bits()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }
}
