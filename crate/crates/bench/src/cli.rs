use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dpgridkm::{generate, load_dataset, CenterPlacement, DomainBounds, RngSeed, SynthConfig};
use serde::Serialize;

use crate::config::{ExperimentConfig, Method, OutputFormat};
use crate::error::{Error, Result};
use crate::harness::{run, synth_for};
use crate::pipeline::{run_method, MethodRun};
use crate::tables::{emit_sizing_tables, emit_tables, sizing_row, SizingRow};

#[derive(Debug, Parser)]
#[command(name = "dpgridkm", version, about = "Differentially private grid K-means toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic blob dataset (CSV plus JSON sidecar).
    Gen(SweepArgs),
    /// Print grid sizes chosen by RUGNIK and EUGkM.
    Size(SweepArgs),
    /// Cluster a CSV dataset with one method.
    Cluster(ClusterArgs),
    /// Run the Monte Carlo sweep and write all tables.
    Bench(SweepArgs),
    /// Write the grid-count and threshold tables without clustering.
    Tables(SweepArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// JSON experiment config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub method: Option<Vec<Method>>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub cluster_std: Option<f64>,
    /// Synthetic cluster centre layout: lattice or random.
    #[arg(long, value_parser = parse_placement)]
    pub placement: Option<CenterPlacement>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    /// Headerless or single-header CSV, one point per row.
    pub input: PathBuf,
    /// Clamp out-of-domain coordinates instead of rejecting them.
    #[arg(long)]
    pub clip: bool,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

impl SweepArgs {
    /// Config file (or defaults) with flag values laid over it.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => ExperimentConfig::default(),
        };
        if self.n.is_some() || self.k.is_some() {
            cfg.kn_pairs.clear();
        }
        if let Some(v) = &self.n {
            cfg.ns = v.clone();
        }
        if let Some(v) = &self.k {
            cfg.ks = v.clone();
        }
        if let Some(v) = &self.d {
            cfg.ds = v.clone();
        }
        if let Some(v) = &self.epsilon {
            cfg.epsilons = v.clone();
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.seed {
            cfg.base_seed = RngSeed(v);
        }
        if let Some(v) = &self.method {
            cfg.methods = v.clone();
        }
        if let Some(v) = self.r {
            cfg.r = v;
        }
        if self.cluster_std.is_some() {
            cfg.cluster_std = self.cluster_std;
        }
        if let Some(v) = self.placement {
            cfg.placement = v;
        }
        if let Some(v) = &self.out_dir {
            cfg.out_dir = v.clone();
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
        Ok(cfg)
    }
}

fn parse_placement(s: &str) -> std::result::Result<CenterPlacement, String> {
    match s.to_ascii_lowercase().as_str() {
        "lattice" => Ok(CenterPlacement::Lattice),
        "random" => Ok(CenterPlacement::Random),
        _ => Err(format!("unknown placement {s:?} (expected lattice or random)")),
    }
}

fn single<T: Copy + std::fmt::Debug>(name: &str, values: &[T]) -> Result<T> {
    match values {
        [v] => Ok(*v),
        _ => Err(Error::Config(format!("--{name} takes exactly one value here, got {values:?}"))),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(args) => gen(&args),
        Command::Size(args) => size(&args),
        Command::Cluster(args) => cluster(&args),
        Command::Bench(args) => {
            let cfg = args.resolve()?;
            let report = run(&cfg)?;
            print_paths(&emit_tables(&report, &cfg.out_dir, cfg.format)?);
            Ok(())
        }
        Command::Tables(args) => {
            let cfg = args.resolve()?;
            print_paths(&emit_sizing_tables(&cfg, &cfg.out_dir, cfg.format)?);
            Ok(())
        }
    }
}

fn gen(args: &SweepArgs) -> Result<()> {
    let cfg = args.resolve()?;
    let cells = cfg.data_cells();
    let cell = single("n/--k/--d", &cells)?;
    if cell.k == 0 || cell.n < cell.k {
        return Err(Error::Config(format!("need N >= K >= 1, got N = {}, K = {}", cell.n, cell.k)));
    }
    let synth: SynthConfig<f64> = synth_for(&cfg, cell, cfg.base_seed);
    let out = generate(&synth)?;
    ensure_dir(&cfg.out_dir)?;
    let stem = format!("synth_n{}_d{}_k{}_seed{}", cell.n, cell.d, cell.k, cfg.base_seed.0);
    let csv_path = cfg.out_dir.join(format!("{stem}.csv"));
    dpgridkm::write_dataset(&csv_path, &out.dataset)?;
    let json_path = cfg.out_dir.join(format!("{stem}.json"));
    let file = File::create(&json_path).map_err(|e| Error::io(&json_path, e))?;
    serde_json::to_writer_pretty(file, &out.sidecar(&synth))?;
    print_paths(&[csv_path, json_path]);
    Ok(())
}

fn size(args: &SweepArgs) -> Result<()> {
    let mut cfg = args.resolve()?;
    if args.method.is_none() {
        cfg.methods = vec![Method::Eugkm, Method::Rugnik];
    }
    cfg.validate()?;
    let methods: Vec<Method> = cfg.sorted_methods().into_iter().filter(|m| m.is_grid()).collect();
    if methods.is_empty() {
        return Err(Error::Config("size needs rugnik or eugkm in --method".into()));
    }
    let mut rows: Vec<SizingRow> = Vec::new();
    for cell in cfg.data_cells() {
        for eps in cfg.sorted_epsilons() {
            for &m in &methods {
                rows.push(sizing_row(m, cell, eps)?);
            }
        }
    }
    let stdout = std::io::stdout();
    match cfg.format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(stdout.lock(), &rows)?;
            println!();
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(stdout.lock());
            for row in &rows {
                w.serialize(row)?;
            }
            w.flush().map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ClusterOutput<'a> {
    input: &'a Path,
    k: usize,
    epsilon: Option<f64>,
    seed: u64,
    #[serde(flatten)]
    run: &'a MethodRun,
}

/// Column count of the first all-numeric row.
fn infer_dim(path: &Path) -> Result<usize> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Config(format!("{}: {other:?}", path.display())),
        })?;
    for record in reader.records() {
        let record = record?;
        if record.iter().all(|f| f.parse::<f64>().is_ok()) && !record.is_empty() {
            return Ok(record.len());
        }
    }
    Err(dpgridkm::Error::EmptyDataset.into())
}

fn cluster(args: &ClusterArgs) -> Result<()> {
    let sweep = &args.sweep;
    let cfg = sweep.resolve()?;
    let method = match &sweep.method {
        Some(m) => single("method", m)?,
        None => Method::Rugnik,
    };
    let k = single("k", sweep.k.as_deref().unwrap_or(&[]))?;
    let epsilon = if method.is_private() {
        Some(single("epsilon", sweep.epsilon.as_deref().unwrap_or(&[]))?)
    } else {
        None
    };
    let d = infer_dim(&args.input)?;
    if let Some(ds) = &sweep.d {
        let want = single("d", ds)?;
        if want != d {
            return Err(dpgridkm::Error::DimensionMismatch { expected: want, found: d }.into());
        }
    }
    let bounds = DomainBounds::new(cfg.r, d)?;
    let data = load_dataset(&args.input, bounds, args.clip)?;
    let run = run_method(method, &data, k, epsilon.unwrap_or(f64::NAN), cfg.base_seed)?;
    let out = ClusterOutput {
        input: &args.input,
        k,
        epsilon,
        seed: cfg.base_seed.0,
        run: &run,
    };
    let format = sweep.format.unwrap_or(OutputFormat::Json);
    match &sweep.out_dir {
        Some(dir) => {
            ensure_dir(dir)?;
            let path = match format {
                OutputFormat::Json => {
                    let path = dir.join("cluster.json");
                    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
                    serde_json::to_writer_pretty(file, &out)?;
                    path
                }
                OutputFormat::Csv => {
                    let path = dir.join("centroids.csv");
                    write_centroids(csv::Writer::from_path(&path)?, &run)?;
                    path
                }
            };
            print_paths(&[path]);
        }
        None => match format {
            OutputFormat::Json => {
                let mut stdout = std::io::stdout().lock();
                serde_json::to_writer_pretty(&mut stdout, &out)?;
                writeln!(stdout).map_err(|e| Error::io("<stdout>", e))?;
            }
            OutputFormat::Csv => write_centroids(csv::Writer::from_writer(std::io::stdout().lock()), &run)?,
        },
    }
    Ok(())
}

fn write_centroids<W: Write>(mut w: csv::Writer<W>, run: &MethodRun) -> Result<()> {
    for c in &run.model.centroids {
        w.write_record(c.iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))
}
