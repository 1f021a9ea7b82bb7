//! One method applied to one dataset.

use dpgridkm::{
    build_grid, dplloyd, eugkm, evaluate_wcss, histogram, make_params, nonprivate_kmeans,
    solve_rugnik, weighted_lloyd, ClusterModel, Dataset, DpLloydConfig, GridChoice, LloydConfig,
    PrivacyBudget, RngSeed, WeightedPointSet,
};
use serde::{Deserialize, Serialize};

use crate::config::Method;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRun {
    pub method: Method,
    /// Centroids scored against the raw dataset.
    pub model: ClusterModel<f64>,
    pub grid: Option<GridChoice<f64>>,
    /// Fewer grid cells than clusters; the model pads duplicated centroids.
    pub degenerate: bool,
    /// Every noisy count was non-positive, so the cells were clustered with unit weights.
    pub unit_weight_fallback: bool,
    pub epsilon_spent: Option<f64>,
}

pub fn choose_grid(method: Method, n: usize, d: usize, k: usize, epsilon: f64) -> Result<GridChoice<f64>> {
    match method {
        Method::Rugnik => Ok(solve_rugnik(
            &make_params(n, d, k, epsilon)?,
            dpgridkm::sizing::DEFAULT_XI_TOL,
        )?),
        Method::Eugkm => Ok(eugkm(n, d, epsilon)?),
        other => Err(Error::Config(format!("{other} does not use a grid"))),
    }
}

/// Runs `method` on `data` with K clusters and total budget `epsilon`, and
/// audits the budget actually spent.
pub fn run_method(method: Method, data: &Dataset<f64>, k: usize, epsilon: f64, seed: RngSeed) -> Result<MethodRun> {
    let run = match method {
        Method::Rugnik | Method::Eugkm => run_grid(method, data, k, epsilon, seed)?,
        Method::Dplloyd => {
            let cfg = DpLloydConfig::new(k, epsilon, data.bounds(), seed);
            let out = dplloyd(data, &cfg)?;
            if !out.ledger.matches(epsilon) {
                return Err(audit_failure(method, out.ledger.total(), epsilon));
            }
            MethodRun {
                method,
                model: out.model,
                grid: None,
                degenerate: false,
                unit_weight_fallback: false,
                epsilon_spent: Some(out.ledger.total()),
            }
        }
        Method::Noprivacy => {
            let fitted = nonprivate_kmeans(data, &LloydConfig::new(k, seed))?;
            MethodRun {
                method,
                model: evaluate_wcss(data, &fitted.centroids)?,
                grid: None,
                degenerate: false,
                unit_weight_fallback: false,
                epsilon_spent: None,
            }
        }
    };
    Ok(run)
}

fn audit_failure(method: Method, spent: f64, configured: f64) -> Error {
    Error::BudgetAudit {
        method: method.to_string(),
        spent,
        configured,
    }
}

fn run_grid(method: Method, data: &Dataset<f64>, k: usize, epsilon: f64, seed: RngSeed) -> Result<MethodRun> {
    let choice = choose_grid(method, data.len(), data.dim(), k, epsilon)?;
    let grid = build_grid(data.bounds(), choice.m)?;
    let released = histogram(data, &grid)?
        .privatize(PrivacyBudget::new(epsilon)?, seed.derive(0))?
        .release()
        .expect("privatized histogram is releasable");
    let spent = released.epsilon_spent();
    let mut ledger = dpgridkm::BudgetLedger::new();
    ledger.charge("histogram release", spent);
    if !ledger.matches(epsilon) {
        return Err(audit_failure(method, spent, epsilon));
    }

    let mut wps = released.weighted_points();
    let unit_weight_fallback = !wps.raw_weights().iter().any(|&w| w > 0.0);
    if unit_weight_fallback {
        wps = WeightedPointSet::new(wps.points().to_vec(), vec![1.0; wps.len()])?;
    }
    let degenerate = choice.is_degenerate(k);
    let k_fit = k.min(wps.len());
    let fitted = weighted_lloyd(&wps, &LloydConfig::new(k_fit, seed.derive(1)))?;
    let mut centroids = fitted.centroids;
    for i in k_fit..k {
        centroids.push(centroids[i % k_fit].clone());
    }
    Ok(MethodRun {
        method,
        model: evaluate_wcss(data, &centroids)?,
        grid: Some(choice),
        degenerate,
        unit_weight_fallback,
        epsilon_spent: Some(ledger.total()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dpgridkm::{generate, SynthConfig};

    fn data(n: usize, k: usize) -> Dataset<f64> {
        generate(&SynthConfig::new(n, 2, k, RngSeed(1))).unwrap().dataset
    }

    #[test]
    fn degenerate_grid_is_padded() {
        let data = data(100, 2);
        let run = run_method(Method::Eugkm, &data, 2, 0.1, RngSeed(3)).unwrap();
        assert!(run.degenerate);
        assert_eq!(run.grid.unwrap().cells, 1);
        assert_eq!(run.model.centroids.len(), 2);
        assert_eq!(run.model.centroids[0], run.model.centroids[1]);
    }

    #[test]
    fn budget_is_recorded() {
        let data = data(200, 4);
        for m in [Method::Rugnik, Method::Eugkm, Method::Dplloyd] {
            let run = run_method(m, &data, 4, 0.25, RngSeed(9)).unwrap();
            assert!((run.epsilon_spent.unwrap() - 0.25).abs() < 1e-12, "{m}");
        }
        assert_eq!(run_method(Method::Noprivacy, &data, 4, 0.25, RngSeed(9)).unwrap().epsilon_spent, None);
    }

    #[test]
    fn deterministic_per_seed() {
        let data = data(200, 4);
        let a = run_method(Method::Rugnik, &data, 4, 0.4, RngSeed(2)).unwrap();
        assert_eq!(a, run_method(Method::Rugnik, &data, 4, 0.4, RngSeed(2)).unwrap());
    }

    #[test]
    fn non_grid_method_has_no_grid() {
        assert!(choose_grid(Method::Dplloyd, 100, 2, 2, 1.0).is_err());
        assert_eq!(choose_grid(Method::Rugnik, 100, 2, 2, 1.0).unwrap().cells, 25);
    }
}
