//! CSV emission and reading.
//!
//! Raw: `experiment_id,algorithm,run,t,cum_regret`.
//! Aggregate: `experiment_id,algorithm,t,mean_regret,stderr,n_runs`.
//! Floats are written in shortest round-trip form, so reading a file back
//! reproduces the values exactly.

use std::path::Path;

use crate::error::{Error, Result};
use crate::simulator::{AggregatedResult, ExperimentResult, Series};
use crate::theorycheck::csv_io;

pub const RAW_HEADER: [&str; 5] = ["experiment_id", "algorithm", "run", "t", "cum_regret"];
pub const AGGREGATE_HEADER: [&str; 6] =
    ["experiment_id", "algorithm", "t", "mean_regret", "stderr", "n_runs"];

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
        }
        _ => Ok(()),
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    create_parent(path)?;
    csv::Writer::from_path(path).map_err(|e| csv_io(e, path))
}

/// Per-run checkpoints, ordered by algorithm, run, then round.
pub fn write_raw_csv(experiment_id: &str, result: &ExperimentResult, path: &Path) -> Result<()> {
    if result.curves.is_empty() {
        return Err(Error::config("nothing to write: no run curves"));
    }
    let mut w = writer(path)?;
    w.write_record(RAW_HEADER)?;
    for (a, label) in result.labels.iter().enumerate() {
        for curve in result.curves.iter().filter(|c| c.algorithm == a) {
            let run = curve.run.to_string();
            for (t, v) in result.checkpoints.iter().zip(&curve.values) {
                w.write_record([experiment_id, label, &run, &t.to_string(), &v.to_string()])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_aggregate_csv(agg: &AggregatedResult, path: &Path) -> Result<()> {
    if agg.series.is_empty() {
        return Err(Error::config("nothing to write: no series"));
    }
    let mut w = writer(path)?;
    w.write_record(AGGREGATE_HEADER)?;
    for s in &agg.series {
        let n = s.n_runs.to_string();
        for (i, t) in agg.checkpoints.iter().enumerate() {
            w.write_record([
                agg.experiment_id.as_str(),
                &s.algorithm,
                &t.to_string(),
                &s.mean[i].to_string(),
                &s.stderr[i].to_string(),
                &n,
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One row of a raw CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct RawRow {
    pub experiment_id: String,
    pub algorithm: String,
    pub run: usize,
    pub t: usize,
    pub cum_regret: f64,
}

fn check_header(reader: &mut csv::Reader<std::fs::File>, expected: &[&str], path: &Path) -> Result<()> {
    let header = reader.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::parse(
            path.display().to_string(),
            format!("expected header '{}'", expected.join(",")),
        ));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, path: &Path, line: u64) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| {
        Error::parse(
            format!("{}:{line}", path.display()),
            format!("bad value '{raw}' in column {}", i + 1),
        )
    })
}

pub fn read_raw_csv(path: &Path) -> Result<Vec<RawRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_io(e, path))?;
    check_header(&mut r, &RAW_HEADER, path)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push(RawRow {
            experiment_id: rec[0].to_string(),
            algorithm: rec[1].to_string(),
            run: field(&rec, 2, path, line)?,
            t: field(&rec, 3, path, line)?,
            cum_regret: field(&rec, 4, path, line)?,
        });
    }
    Ok(rows)
}

/// Reads an aggregate CSV written by [`write_aggregate_csv`]. Series keep
/// their order of first appearance and must share one checkpoint list.
pub fn read_aggregate_csv(path: &Path) -> Result<AggregatedResult> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_io(e, path))?;
    check_header(&mut r, &AGGREGATE_HEADER, path)?;
    let mut experiment_id: Option<String> = None;
    let mut series: Vec<(Series, Vec<usize>)> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        experiment_id.get_or_insert_with(|| rec[0].to_string());
        let alg = &rec[1];
        let idx = match series.iter().position(|(s, _)| s.algorithm == alg) {
            Some(i) => i,
            None => {
                series.push((
                    Series {
                        algorithm: alg.to_string(),
                        mean: Vec::new(),
                        stderr: Vec::new(),
                        n_runs: field(&rec, 5, path, line)?,
                    },
                    Vec::new(),
                ));
                series.len() - 1
            }
        };
        let (s, ts) = &mut series[idx];
        ts.push(field(&rec, 2, path, line)?);
        s.mean.push(field(&rec, 3, path, line)?);
        s.stderr.push(field(&rec, 4, path, line)?);
    }
    let Some(((_, checkpoints), _)) = series.split_first() else {
        return Err(Error::parse(path.display().to_string(), "no data rows"));
    };
    let checkpoints = checkpoints.clone();
    if series.iter().any(|(_, ts)| *ts != checkpoints) {
        return Err(Error::parse(
            path.display().to_string(),
            "series disagree on their checkpoint rounds",
        ));
    }
    Ok(AggregatedResult {
        experiment_id: experiment_id.unwrap_or_default(),
        checkpoints,
        series: series.into_iter().map(|(s, _)| s).collect(),
    })
}
