//! Experiment configuration files and their command-line overrides.
//!
//! ```text
//! # comments start with '#'
//! [experiment]
//! id = fig1
//! T = 10000
//! runs = 100
//! seed = 7
//! stride = 50            # optional, default max(1, T/200)
//! accounting = expected  # or realized
//!
//! [environment]
//! spec = mab:bernoulli:K=10:alpha=1
//!
//! [algorithms]
//! alg = mbe:lambda=0.5:sigma=1:B=50
//! alg = ts:bernoulli
//!
//! [sweep]
//! grid = 0.0625,0.125,0.25,0.5,1,2,4
//!
//! [output]
//! raw = out/raw.csv
//! aggregate = out/aggregate.csv
//! plot = out/regret.svg
//! metadata = out/metadata.txt
//! log_x = false
//! log_y = false
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::algs::AlgSpec;
use crate::envs::EnvSpec;
use crate::error::{Error, Result};
use crate::grammar::join_list;
use crate::plot::PlotOptions;
use crate::simulator::{default_grid, Accounting, SimConfig};

/// Values read from a file or flags; anything left `None` takes its default.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PartialConfig {
    pub experiment_id: Option<String>,
    pub horizon: Option<usize>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub stride: Option<usize>,
    pub accounting: Option<Accounting>,
    pub env: Option<EnvSpec>,
    pub algorithms: Vec<AlgSpec>,
    pub grid: Option<Vec<f64>>,
    pub raw: Option<PathBuf>,
    pub aggregate: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
    pub log_x: Option<bool>,
    pub log_y: Option<bool>,
}

/// A complete, validated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub grid: Vec<f64>,
    pub metadata: Option<PathBuf>,
    pub plot: PlotOptions,
}

pub const DEFAULT_HORIZON: usize = 10_000;
pub const DEFAULT_RUNS: usize = 100;
pub const DEFAULT_SEED: u64 = 0;

impl FromStr for Accounting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expected" => Ok(Accounting::Expected),
            "realized" => Ok(Accounting::Realized),
            _ => Err(Error::config(format!("accounting must be 'expected' or 'realized', got '{s}'"))),
        }
    }
}

impl std::fmt::Display for Accounting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Accounting::Expected => "expected",
            Accounting::Realized => "realized",
        })
    }
}

fn at<T>(location: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidConfig(m) => Error::parse(location, m),
        other => other,
    })
}

fn parse_value<T: FromStr>(location: &str, key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::parse(location, format!("bad value '{raw}' for '{key}'")))
}

fn parse_bool(location: &str, key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::parse(location, format!("bad boolean '{raw}' for '{key}'"))),
    }
}

pub fn parse_grid(raw: &str) -> Result<Vec<f64>> {
    let grid: Vec<f64> = raw
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::config(format!("bad grid '{raw}'")))?;
    if grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::config(format!("grid values must be positive, got '{raw}'")));
    }
    Ok(grid)
}

impl PartialConfig {
    /// Parses the file format. `origin` names the source in error messages.
    pub fn parse_str(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = PartialConfig::default();
        let mut section: Option<String> = None;
        for (i, line) in text.lines().enumerate() {
            let loc = format!("{origin}:{}", i + 1);
            let line = match line.find('#') {
                Some(p) => &line[..p],
                None => line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !["experiment", "environment", "algorithms", "sweep", "output"].contains(&name) {
                    return Err(Error::parse(loc, format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(loc, format!("expected 'key = value', got '{line}'")));
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(sec) = section.as_deref() else {
                return Err(Error::parse(loc, "key before any [section]"));
            };
            let dup = |set: bool| -> Result<()> {
                if set {
                    Err(Error::parse(&loc, format!("duplicate key '{key}'")))
                } else {
                    Ok(())
                }
            };
            match (sec, key) {
                ("experiment", "id") => {
                    dup(cfg.experiment_id.is_some())?;
                    cfg.experiment_id = Some(value.to_string());
                }
                ("experiment", "T") => {
                    dup(cfg.horizon.is_some())?;
                    cfg.horizon = Some(parse_value(&loc, key, value)?);
                }
                ("experiment", "runs") => {
                    dup(cfg.runs.is_some())?;
                    cfg.runs = Some(parse_value(&loc, key, value)?);
                }
                ("experiment", "seed") => {
                    dup(cfg.seed.is_some())?;
                    cfg.seed = Some(parse_value(&loc, key, value)?);
                }
                ("experiment", "stride") => {
                    dup(cfg.stride.is_some())?;
                    cfg.stride = Some(parse_value(&loc, key, value)?);
                }
                ("experiment", "accounting") => {
                    dup(cfg.accounting.is_some())?;
                    cfg.accounting = Some(at(&loc, value.parse())?);
                }
                ("environment", "spec") => {
                    dup(cfg.env.is_some())?;
                    cfg.env = Some(at(&loc, value.parse())?);
                }
                ("algorithms", "alg") => cfg.algorithms.push(at(&loc, value.parse())?),
                ("sweep", "grid") => {
                    dup(cfg.grid.is_some())?;
                    cfg.grid = Some(at(&loc, parse_grid(value))?);
                }
                ("output", "raw") => {
                    dup(cfg.raw.is_some())?;
                    cfg.raw = Some(value.into());
                }
                ("output", "aggregate") => {
                    dup(cfg.aggregate.is_some())?;
                    cfg.aggregate = Some(value.into());
                }
                ("output", "plot") => {
                    dup(cfg.plot.is_some())?;
                    cfg.plot = Some(value.into());
                }
                ("output", "metadata") => {
                    dup(cfg.metadata.is_some())?;
                    cfg.metadata = Some(value.into());
                }
                ("output", "log_x") => {
                    dup(cfg.log_x.is_some())?;
                    cfg.log_x = Some(parse_bool(&loc, key, value)?);
                }
                ("output", "log_y") => {
                    dup(cfg.log_y.is_some())?;
                    cfg.log_y = Some(parse_bool(&loc, key, value)?);
                }
                _ => return Err(Error::parse(loc, format!("unknown key '{key}' in [{sec}]"))),
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        // An unreadable config is the user's input problem, not a run failure.
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::parse(path.display().to_string(), format!("cannot read config: {e}")))?;
        Self::parse_str(&text, &path.display().to_string())
    }

    /// `other`'s set values win. A nonempty algorithm list replaces ours.
    pub fn overlay(mut self, other: PartialConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            experiment_id, horizon, runs, seed, stride, accounting, env, grid, raw, aggregate,
            plot, metadata, log_x, log_y
        );
        if !other.algorithms.is_empty() {
            self.algorithms = other.algorithms;
        }
        self
    }

    /// Fills defaults and validates.
    pub fn resolve(self) -> Result<RunConfig> {
        let env = self.env.ok_or_else(|| Error::config("no environment given"))?;
        let mut sim = SimConfig::new(
            env,
            self.algorithms,
            self.horizon.unwrap_or(DEFAULT_HORIZON),
            self.runs.unwrap_or(DEFAULT_RUNS),
            self.seed.unwrap_or(DEFAULT_SEED),
        );
        if let Some(id) = self.experiment_id {
            sim.experiment_id = id;
        }
        sim.stride = self.stride;
        sim.accounting = self.accounting.unwrap_or_default();
        sim.raw_csv = self.raw;
        sim.aggregate_csv = self.aggregate;
        sim.plot_svg = self.plot;
        sim.validate()?;
        let grid = self.grid.unwrap_or_else(default_grid);
        if grid.is_empty() {
            return Err(Error::config("sweep grid is empty"));
        }
        Ok(RunConfig {
            sim,
            grid,
            metadata: self.metadata,
            plot: PlotOptions {
                log_x: self.log_x.unwrap_or(false),
                log_y: self.log_y.unwrap_or(false),
                title: None,
            },
        })
    }
}

impl RunConfig {
    /// The configuration in file form. Parsing it back gives an equal
    /// [`RunConfig`].
    pub fn to_config_string(&self) -> String {
        let s = &self.sim;
        let mut out = String::new();
        let _ = writeln!(out, "[experiment]");
        let _ = writeln!(out, "id = {}", s.experiment_id);
        let _ = writeln!(out, "T = {}", s.horizon);
        let _ = writeln!(out, "runs = {}", s.runs);
        let _ = writeln!(out, "seed = {}", s.seed);
        if let Some(stride) = s.stride {
            let _ = writeln!(out, "stride = {stride}");
        }
        let _ = writeln!(out, "accounting = {}", s.accounting);
        let _ = writeln!(out, "\n[environment]\nspec = {}", s.env);
        let _ = writeln!(out, "\n[algorithms]");
        for a in &s.algorithms {
            let _ = writeln!(out, "alg = {a}");
        }
        let _ = writeln!(out, "\n[sweep]\ngrid = {}", join_list(&self.grid));
        let _ = writeln!(out, "\n[output]");
        let paths = [
            ("raw", &s.raw_csv),
            ("aggregate", &s.aggregate_csv),
            ("plot", &s.plot_svg),
            ("metadata", &self.metadata),
        ];
        for (k, p) in paths {
            if let Some(p) = p {
                let _ = writeln!(out, "{k} = {}", p.display());
            }
        }
        let _ = writeln!(out, "log_x = {}", self.plot.log_x);
        let _ = writeln!(out, "log_y = {}", self.plot.log_y);
        out
    }
}

/// Writes the metadata block: a commented header (version, seed, status,
/// notices) followed by the configuration echo.
pub fn write_metadata(cfg: &RunConfig, status: &str, path: &Path) -> Result<()> {
    let mut text = String::new();
    let _ = writeln!(text, "# mbe {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "# status: {status}");
    let _ = writeln!(text, "# master seed: {}", cfg.sim.seed);
    let _ = writeln!(
        text,
        "# each run draws a fresh environment instance; run r uses stream ({}, r)",
        crate::rng::stable_hash(&cfg.sim.experiment_id)
    );
    for n in cfg.sim.tuning_notices() {
        let _ = writeln!(text, "# notice: {n}");
    }
    text.push_str(&cfg.to_config_string());
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# full-size Bernoulli run
[experiment]
id = fig
T = 10000
runs = 100
seed = 7

[environment]
spec = mab:bernoulli:K=10:alpha=1

[algorithms]
alg = mbe:lambda=0.5:sigma=1:B=50   # ensemble
alg = ts:bernoulli

[output]
aggregate = out/agg.csv
log_y = true
";

    #[test]
    fn parses_sample() {
        let cfg = PartialConfig::parse_str(SAMPLE, "sample").unwrap().resolve().unwrap();
        assert_eq!(cfg.sim.horizon, 10_000);
        assert_eq!(cfg.sim.runs, 100);
        assert_eq!(cfg.sim.seed, 7);
        assert_eq!(cfg.sim.algorithms.len(), 2);
        assert_eq!(cfg.sim.aggregate_csv.as_deref(), Some(Path::new("out/agg.csv")));
        assert!(cfg.plot.log_y);
        assert_eq!(cfg.grid, default_grid());
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = PartialConfig::parse_str(SAMPLE, "sample").unwrap().resolve().unwrap();
        cfg.sim.stride = Some(25);
        cfg.grid = vec![0.5, 1.0];
        let again = PartialConfig::parse_str(&cfg.to_config_string(), "echo")
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("[experiment]\nT = ten\n", "x:2"),
            ("[experiment]\nbogus = 1\n", "x:2"),
            ("[nope]\n", "x:1"),
            ("T = 1\n", "x:1"),
            ("[environment]\nspec = mab:poisson\n", "x:2"),
            ("[algorithms]\nalg = mbe\nalg = frob\n", "x:3"),
            ("[experiment]\nT = 1\nT = 2\n", "x:3"),
            ("[experiment]\nnot a pair\n", "x:2"),
        ];
        for (text, loc) in cases {
            let err = PartialConfig::parse_str(text, "x").unwrap_err();
            assert!(err.is_config_error());
            assert!(err.to_string().starts_with(loc), "{text:?}: {err}");
        }
    }

    #[test]
    fn no_algorithms_is_an_error() {
        let p = PartialConfig {
            env: Some("mab:bernoulli:K=3".parse().unwrap()),
            ..Default::default()
        };
        assert!(p.resolve().unwrap_err().to_string().contains("no algorithms"));
    }

    #[test]
    fn incompatible_pairing_is_an_error() {
        let text = "[environment]\nspec = cascade:L=10:K=2\n[algorithms]\nalg = ts:bernoulli\n";
        let err = PartialConfig::parse_str(text, "x").unwrap().resolve().unwrap_err();
        assert!(err.is_config_error());
    }

    #[test]
    fn overlay_prefers_flags() {
        let file = PartialConfig::parse_str(SAMPLE, "sample").unwrap();
        let flags = PartialConfig {
            seed: Some(9),
            algorithms: vec!["eg:a=1".parse().unwrap()],
            ..Default::default()
        };
        let cfg = file.overlay(flags).resolve().unwrap();
        assert_eq!(cfg.sim.seed, 9);
        assert_eq!(cfg.sim.horizon, 10_000);
        assert_eq!(cfg.sim.algorithms.len(), 1);
    }
}
