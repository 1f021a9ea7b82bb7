//! Table emission. Column order is fixed by the sorted config lists, so
//! identical configs give byte-identical CSVs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use dpgridkm::{make_params, theorem_bounds};
use serde::{Deserialize, Serialize};

use crate::config::{DataCell, ExperimentConfig, Method, OutputFormat};
use crate::error::{Error, Result};
use crate::harness::{ExperimentResult, Report};
use crate::pipeline::choose_grid;

/// Grid choice of one sizing rule at one (K, N, d, epsilon).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingRow {
    pub method: Method,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub epsilon: f64,
    pub m_continuous: f64,
    pub m: usize,
    pub cells: usize,
    pub degenerate: bool,
    /// RUGNIK only; present when the threshold condition holds.
    pub m_lower: Option<f64>,
    pub m_upper: Option<f64>,
}

/// Budget range of the resolution bounds, rounded outward to 3 decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub eps0: f64,
    pub eps1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablesJson {
    pub report: Option<Report>,
    pub grids: Vec<SizingRow>,
    pub thresholds: Vec<ThresholdRow>,
}

pub fn sizing_row(method: Method, cell: DataCell, epsilon: f64) -> Result<SizingRow> {
    let g = choose_grid(method, cell.n, cell.d, cell.k, epsilon)?;
    let bounds = match method {
        Method::Rugnik => Some(theorem_bounds(&make_params(cell.n, cell.d, cell.k, epsilon)?)),
        _ => None,
    };
    Ok(SizingRow {
        method,
        n: cell.n,
        d: cell.d,
        k: cell.k,
        epsilon,
        m_continuous: g.m_continuous,
        m: g.m,
        cells: g.cells,
        degenerate: g.is_degenerate(cell.k),
        m_lower: bounds.and_then(|b| b.m_lower),
        m_upper: bounds.and_then(|b| b.m_upper),
    })
}

/// EUGkM and RUGNIK choices for every data cell and epsilon of `cfg`.
pub fn sizing_rows(cfg: &ExperimentConfig) -> Result<Vec<SizingRow>> {
    let mut rows = Vec::new();
    for cell in cfg.data_cells() {
        for eps in cfg.sorted_epsilons() {
            for method in [Method::Eugkm, Method::Rugnik] {
                rows.push(sizing_row(method, cell, eps)?);
            }
        }
    }
    Ok(rows)
}

pub fn threshold_rows(cfg: &ExperimentConfig) -> Result<Vec<ThresholdRow>> {
    cfg.data_cells()
        .into_iter()
        .map(|c| {
            let (eps0, eps1) = make_params(c.n, c.d, c.k, 1.0)?.threshold_range_rounded(3);
            Ok(ThresholdRow {
                n: c.n,
                d: c.d,
                k: c.k,
                eps0,
                eps1,
            })
        })
        .collect()
}

fn eps_label(e: f64) -> String {
    format!("{e}")
}

fn create(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn distinct_sorted<T: PartialOrd + Copy>(mut v: Vec<T>) -> Vec<T> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN keys"));
    v.dedup();
    v
}

/// Rows `(d, K, N, method)`, one column per epsilon holding the mean WCSS;
/// degenerate cells carry a trailing `*`.
pub fn write_wcss_table(results: &[ExperimentResult], path: &Path) -> Result<()> {
    let epsilons = distinct_sorted(results.iter().map(|r| r.epsilon).collect());
    let mut rows: BTreeMap<(usize, usize, usize, Method), Vec<String>> = BTreeMap::new();
    for r in results {
        let row = rows
            .entry((r.d, r.k, r.n, r.method))
            .or_insert_with(|| vec![String::new(); epsilons.len()]);
        let col = epsilons.iter().position(|&e| e == r.epsilon).expect("epsilon listed");
        row[col] = format!("{:.3}{}", r.mean_wcss, if r.degenerate { "*" } else { "" });
    }
    let mut w = create(path)?;
    let mut header = vec!["d".to_string(), "K".into(), "N".into(), "method".into()];
    header.extend(epsilons.iter().map(|&e| eps_label(e)));
    w.write_record(&header)?;
    for ((d, k, n, method), values) in rows {
        let mut rec = vec![d.to_string(), k.to_string(), n.to_string(), method.to_string()];
        rec.extend(values);
        w.write_record(&rec)?;
    }
    finish(w, path)
}

/// Rows `(K, N, method)`, one column per `(d, epsilon)` holding the cell count.
pub fn write_grids_table(rows: &[SizingRow], path: &Path) -> Result<()> {
    let columns = distinct_sorted(rows.iter().map(|r| (r.d, r.epsilon)).collect());
    let mut table: BTreeMap<(usize, usize, Method), Vec<String>> = BTreeMap::new();
    for r in rows {
        let row = table
            .entry((r.k, r.n, r.method))
            .or_insert_with(|| vec![String::new(); columns.len()]);
        let col = columns.iter().position(|&c| c == (r.d, r.epsilon)).expect("column listed");
        row[col] = format!("{}{}", r.cells, if r.degenerate { "*" } else { "" });
    }
    let mut w = create(path)?;
    let mut header = vec!["K".to_string(), "N".into(), "method".into()];
    header.extend(columns.iter().map(|&(d, e)| format!("d{d}_eps{}", eps_label(e))));
    w.write_record(&header)?;
    // the baseline row precedes the refined row within each (K, N)
    let mut keys: Vec<_> = table.keys().copied().collect();
    keys.sort_by_key(|&(k, n, m)| (k, n, m != Method::Eugkm, m));
    for key in keys {
        let mut rec = vec![key.0.to_string(), key.1.to_string(), key.2.to_string()];
        rec.extend(table[&key].iter().cloned());
        w.write_record(&rec)?;
    }
    finish(w, path)
}

/// Rows `(K, N)`, columns `eps0_d{d}, eps1_d{d}` for each d.
pub fn write_thresholds_table(rows: &[ThresholdRow], path: &Path) -> Result<()> {
    let ds = distinct_sorted(rows.iter().map(|r| r.d).collect());
    let mut table: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
    for r in rows {
        let row = table
            .entry((r.k, r.n))
            .or_insert_with(|| vec![String::new(); 2 * ds.len()]);
        let col = 2 * ds.iter().position(|&d| d == r.d).expect("d listed");
        row[col] = format!("{:.3}", r.eps0);
        row[col + 1] = format!("{:.3}", r.eps1);
    }
    let mut w = create(path)?;
    let mut header = vec!["K".to_string(), "N".into()];
    for d in &ds {
        header.push(format!("eps0_d{d}"));
        header.push(format!("eps1_d{d}"));
    }
    w.write_record(&header)?;
    for ((k, n), values) in table {
        let mut rec = vec![k.to_string(), n.to_string()];
        rec.extend(values);
        w.write_record(&rec)?;
    }
    finish(w, path)
}

/// Long-form results without wall time.
pub fn write_results_csv(results: &[ExperimentResult], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_record([
        "method",
        "N",
        "d",
        "K",
        "epsilon",
        "m",
        "cells",
        "mean_wcss",
        "std_wcss",
        "trials",
        "degenerate",
        "unit_weight_fallbacks",
        "epsilon_spent",
    ])?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in results {
        w.write_record([
            r.method.to_string(),
            r.n.to_string(),
            r.d.to_string(),
            r.k.to_string(),
            eps_label(r.epsilon),
            opt(r.m.map(|v| v.to_string())),
            opt(r.cells.map(|v| v.to_string())),
            r.mean_wcss.to_string(),
            r.std_wcss.to_string(),
            r.trials.to_string(),
            r.degenerate.to_string(),
            r.unit_weight_fallbacks.to_string(),
            opt(r.epsilon_spent.map(|v| v.to_string())),
        ])?;
    }
    finish(w, path)
}

fn write_json(value: &impl Serialize, path: &Path) -> Result<()> {
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(&mut file, value)?;
    writeln!(file).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes the benchmark outputs into `out_dir` and returns their paths.
///
/// CSV: `wcss_table.csv`, `grids_table.csv`, `thresholds_table.csv`,
/// `results.csv` and `results.json`. JSON: `results.json` only, carrying the
/// report and both sizing tables.
pub fn emit_tables(report: &Report, out_dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    report.config.validate()?;
    if report.results.is_empty() {
        return Err(Error::Config("no results to emit".into()));
    }
    ensure_dir(out_dir)?;
    let grids = sizing_rows(&report.config)?;
    let thresholds = threshold_rows(&report.config)?;
    let json_path = out_dir.join("results.json");
    let bundle = TablesJson {
        report: Some(report.clone()),
        grids: grids.clone(),
        thresholds: thresholds.clone(),
    };
    let mut written = Vec::new();
    if format == OutputFormat::Csv {
        let wcss = out_dir.join("wcss_table.csv");
        write_wcss_table(&report.results, &wcss)?;
        let g = out_dir.join("grids_table.csv");
        write_grids_table(&grids, &g)?;
        let t = out_dir.join("thresholds_table.csv");
        write_thresholds_table(&thresholds, &t)?;
        let long = out_dir.join("results.csv");
        write_results_csv(&report.results, &long)?;
        written.extend([wcss, g, t, long]);
    }
    write_json(&bundle, &json_path)?;
    written.push(json_path);
    Ok(written)
}

/// Sizing-only outputs (no Monte Carlo): `grids_table.csv` and
/// `thresholds_table.csv`, or `tables.json`.
pub fn emit_sizing_tables(cfg: &ExperimentConfig, out_dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    ensure_dir(out_dir)?;
    let grids = sizing_rows(cfg)?;
    let thresholds = threshold_rows(cfg)?;
    match format {
        OutputFormat::Csv => {
            let g = out_dir.join("grids_table.csv");
            write_grids_table(&grids, &g)?;
            let t = out_dir.join("thresholds_table.csv");
            write_thresholds_table(&thresholds, &t)?;
            Ok(vec![g, t])
        }
        OutputFormat::Json => {
            let path = out_dir.join("tables.json");
            write_json(
                &TablesJson {
                    report: None,
                    grids,
                    thresholds,
                },
                &path,
            )?;
            Ok(vec![path])
        }
    }
}

/// Reads back a `results.json` written by [`emit_tables`].
pub fn read_results_json(path: &Path) -> Result<TablesJson> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
