//! Command-line front end: `simulate`, `sweep`, `theorycheck`, `plot`.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for failures
//! while running. `MBE_SEED`, when set, overrides `--seed`.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::algs::AlgSpec;
use crate::config::{parse_grid, write_metadata, PartialConfig, RunConfig};
use crate::envs::EnvSpec;
use crate::error::{Error, Result};
use crate::output::{read_aggregate_csv, write_aggregate_csv, write_raw_csv};
use crate::plot::{write_svg, PlotOptions};
use crate::simulator::{run_experiment, sweep, Accounting};
use crate::theorycheck;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mbe", version, about = "Multiplier bootstrap exploration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every algorithm on fresh instances and write regret curves.
    Simulate(ExperimentArgs),
    /// Tune each algorithm over a grid and keep its best setting.
    Sweep(SweepArgs),
    /// Numeric checks of the supporting lemmas.
    Theorycheck(TheoryArgs),
    /// Render an aggregate CSV as an SVG plot.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Environment spec, e.g. mab:bernoulli:K=10:alpha=1.
    #[arg(long)]
    env: Option<String>,
    /// Algorithm spec; repeat for several. Replaces the file's list.
    #[arg(long = "alg")]
    algs: Vec<String>,
    /// Horizon.
    #[arg(long = "T")]
    horizon: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    id: Option<String>,
    /// Charge realized instead of expected rewards.
    #[arg(long)]
    realized: bool,
    #[arg(long)]
    raw: Option<PathBuf>,
    #[arg(long)]
    aggregate: Option<PathBuf>,
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    metadata: Option<PathBuf>,
    #[arg(long)]
    log_x: bool,
    #[arg(long)]
    log_y: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Comma-separated tuning values; default 2^(k-4), k = 0..6.
    #[arg(long)]
    grid: Option<String>,
    /// Where to write the per-grid-point table.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TheoryArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Machine-readable results.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Aggregate CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    title: Option<String>,
    #[arg(long)]
    log_x: bool,
    #[arg(long)]
    log_y: bool,
}

fn flag<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidConfig(m) => Error::parse(format!("flag --{name}"), m),
        other => other,
    })
}

fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var("MBE_SEED") {
        Ok(raw) => raw
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::parse("env MBE_SEED", format!("bad seed '{raw}'"))),
        Err(_) => Ok(None),
    }
}

impl ExperimentArgs {
    fn resolve(&self, grid: Option<&str>) -> Result<RunConfig> {
        let base = match &self.config {
            Some(p) => PartialConfig::from_file(p)?,
            None => PartialConfig::default(),
        };
        let flags = PartialConfig {
            experiment_id: self.id.clone(),
            horizon: self.horizon,
            runs: self.runs,
            seed: seed_from_env()?.or(self.seed),
            stride: self.stride,
            accounting: self.realized.then_some(Accounting::Realized),
            env: self
                .env
                .as_deref()
                .map(|s| flag("env", s.parse::<EnvSpec>()))
                .transpose()?,
            algorithms: self
                .algs
                .iter()
                .map(|s| flag("alg", s.parse::<AlgSpec>()))
                .collect::<Result<_>>()?,
            grid: grid.map(|g| flag("grid", parse_grid(g))).transpose()?,
            raw: self.raw.clone(),
            aggregate: self.aggregate.clone(),
            plot: self.plot.clone(),
            metadata: self.metadata.clone(),
            log_x: self.log_x.then_some(true),
            log_y: self.log_y.then_some(true),
        };
        let mut cfg = base.overlay(flags).resolve()?;
        let id = cfg.sim.experiment_id.clone();
        let default = |suffix: &str| Some(PathBuf::from(format!("{id}_{suffix}")));
        cfg.sim.raw_csv = cfg.sim.raw_csv.or_else(|| default("raw.csv"));
        cfg.sim.aggregate_csv = cfg.sim.aggregate_csv.or_else(|| default("aggregate.csv"));
        cfg.metadata = cfg.metadata.or_else(|| default("metadata.txt"));
        Ok(cfg)
    }
}

/// Writes metadata before running and again with the outcome, so it exists
/// even when the run fails.
fn with_metadata<T>(cfg: &RunConfig, body: impl FnOnce() -> Result<T>) -> Result<T> {
    let meta = cfg.metadata.as_deref();
    if let Some(p) = meta {
        write_metadata(cfg, "running", p)?;
    }
    let out = body();
    if let Some(p) = meta {
        let status = match &out {
            Ok(_) => "complete".to_string(),
            Err(e) => format!("failed: {e}"),
        };
        write_metadata(cfg, &status, p)?;
    }
    out
}

fn simulate(args: &ExperimentArgs) -> Result<()> {
    let cfg = args.resolve(None)?;
    for n in cfg.sim.tuning_notices() {
        log::warn!("{n}");
    }
    with_metadata(&cfg, || {
        let res = run_experiment(&cfg.sim)?;
        let sim = &cfg.sim;
        if let Some(p) = &sim.raw_csv {
            write_raw_csv(&sim.experiment_id, &res, p)?;
        }
        if let Some(p) = &sim.aggregate_csv {
            write_aggregate_csv(&res.aggregate, p)?;
        }
        if let Some(p) = &sim.plot_svg {
            write_svg(&res.aggregate, p, &cfg.plot)?;
        }
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{} runs x T={} on {}", sim.runs, sim.horizon, sim.env);
        for s in &res.aggregate.series {
            let _ = writeln!(
                out,
                "  {:<40} final regret {:>12.3} ± {:.3}",
                s.algorithm,
                s.final_mean(),
                s.final_stderr()
            );
        }
        Ok(())
    })
}

fn run_sweep(args: &SweepArgs) -> Result<()> {
    let mut cfg = args.experiment.resolve(args.grid.as_deref())?;
    // A sweep has no per-run output.
    cfg.sim.raw_csv = None;
    let table = args
        .table
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}_sweep.csv", cfg.sim.experiment_id)));
    with_metadata(&cfg, || {
        let report = sweep(&cfg.sim, &cfg.grid)?;
        let best = report.best_aggregate(&cfg.sim.experiment_id);
        if let Some(p) = &cfg.sim.aggregate_csv {
            write_aggregate_csv(&best, p)?;
        }
        if let Some(p) = &cfg.sim.plot_svg {
            write_svg(&best, p, &cfg.plot)?;
        }
        write_sweep_table(&cfg.sim.experiment_id, &report, &table)?;
        let mut out = std::io::stdout().lock();
        for e in &report.entries {
            let _ = writeln!(
                out,
                "  {:<40} best {:<12} final regret {:.3} ± {:.3}",
                e.base.to_string(),
                e.best_value.map_or("-".to_string(), |v| v.to_string()),
                e.best_series.final_mean(),
                e.best_series.final_stderr()
            );
        }
        Ok(())
    })
}

fn write_sweep_table(id: &str, report: &crate::simulator::SweepReport, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| theorycheck::csv_io(e, path))?;
    w.write_record(["experiment_id", "algorithm", "value", "final_mean_regret", "stderr", "best"])?;
    for e in &report.entries {
        let base = e.base.to_string();
        if e.points.is_empty() {
            w.write_record([
                id,
                &base,
                "",
                &e.best_series.final_mean().to_string(),
                &e.best_series.final_stderr().to_string(),
                "true",
            ])?;
        }
        for p in &e.points {
            w.write_record([
                id,
                &base,
                &p.value.to_string(),
                &p.final_mean.to_string(),
                &p.final_stderr.to_string(),
                &(Some(p.value) == e.best_value).to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn theory(args: &TheoryArgs) -> Result<bool> {
    let reports = theorycheck::run_all(args.seed);
    let mut out = std::io::stdout().lock();
    for r in &reports {
        let _ = write!(out, "{r}");
    }
    if let Some(p) = &args.csv {
        theorycheck::write_reports_csv(&reports, p)?;
    }
    Ok(reports.iter().all(|r| r.pass))
}

fn plot(args: &PlotArgs) -> Result<()> {
    let agg = read_aggregate_csv(&args.input)?;
    let opts = PlotOptions {
        log_x: args.log_x,
        log_y: args.log_y,
        title: args.title.clone(),
    };
    write_svg(&agg, &args.output, &opts)
}

fn exit_code(e: &Error) -> i32 {
    if e.is_config_error() {
        EXIT_CONFIG
    } else {
        EXIT_RUNTIME
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a).map(|_| true),
        Command::Sweep(a) => run_sweep(a).map(|_| true),
        Command::Theorycheck(a) => theory(a),
        Command::Plot(a) => plot(a).map(|_| true),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("error: some checks failed");
            EXIT_RUNTIME
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
