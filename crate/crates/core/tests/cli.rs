//! End-to-end runs of the `mbe` binary.

use std::path::Path;
use std::process::{Command, Output};

use mbe::output::{read_aggregate_csv, read_raw_csv};

fn mbe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbe"))
        .args(args)
        .current_dir(dir)
        .env_remove("MBE_SEED")
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL: &[&str] = &[
    "simulate",
    "--env",
    "mab:bernoulli:K=4:alpha=1",
    "--alg",
    "mbe:B=8",
    "--alg",
    "ts:bernoulli",
    "--T",
    "120",
    "--runs",
    "4",
    "--seed",
    "5",
];

#[test]
fn simulate_writes_default_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = mbe(dir.path(), SMALL);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let agg = read_aggregate_csv(&dir.path().join("exp_aggregate.csv")).unwrap();
    assert_eq!(agg.series.len(), 2);
    assert_eq!(*agg.checkpoints.last().unwrap(), 120);
    let raw = read_raw_csv(&dir.path().join("exp_raw.csv")).unwrap();
    assert_eq!(raw.len(), 2 * 4 * agg.checkpoints.len());
    let meta = std::fs::read_to_string(dir.path().join("exp_metadata.txt")).unwrap();
    assert!(meta.contains("complete"), "{meta}");
}

#[test]
fn metadata_reruns_to_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = SMALL.to_vec();
    args.extend(["--id", "first", "--alg", "eg:a=1"]);
    assert_eq!(code(&mbe(dir.path(), &args)), 0);
    let out = mbe(
        dir.path(),
        &["simulate", "--config", "first_metadata.txt", "--raw", "again.csv", "--metadata", "again_meta.txt"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let a = std::fs::read(dir.path().join("first_raw.csv")).unwrap();
    let b = std::fs::read(dir.path().join("again.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn env_seed_overrides_flag() {
    let run = |seed_env: Option<&str>, seed_flag: &str| {
        let dir = tempfile::tempdir().unwrap();
        let mut args = SMALL.to_vec();
        let pos = args.iter().position(|a| *a == "--seed").unwrap();
        args[pos + 1] = seed_flag;
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_mbe"));
        cmd.args(&args).current_dir(dir.path()).env("RUST_LOG", "error");
        match seed_env {
            Some(s) => cmd.env("MBE_SEED", s),
            None => cmd.env_remove("MBE_SEED"),
        };
        assert!(cmd.output().unwrap().status.success());
        std::fs::read(dir.path().join("exp_raw.csv")).unwrap()
    };
    let plain = run(None, "9");
    assert_eq!(plain, run(Some("9"), "1"));
    assert_ne!(plain, run(None, "1"));
}

#[test]
fn bad_env_seed_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mbe"))
        .args(SMALL)
        .current_dir(dir.path())
        .env("MBE_SEED", "soon")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("MBE_SEED"));
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["simulate", "--env", "mab:bernoulli:K=0", "--alg", "mbe", "--T", "10"],
        &["simulate", "--env", "mab:bernoulli:K=3", "--alg", "nonsense", "--T", "10"],
        &["simulate", "--env", "mab:bernoulli:K=3", "--T", "10"],
        &["simulate", "--env", "mab:bernoulli:K=3", "--alg", "mbe", "--T", "0"],
        &["simulate", "--config", "missing.cfg"],
        &["sweep", "--env", "mab:bernoulli:K=3", "--alg", "eg", "--grid", "a,b"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = mbe(dir.path(), args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
        assert!(!stderr(&out).is_empty());
    }
}

#[test]
fn bad_config_line_is_located() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("x.cfg"), "[experiment]\nT = 10\nruns = many\n").unwrap();
    let out = mbe(dir.path(), &["simulate", "--config", "x.cfg"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("x.cfg:3"), "{}", stderr(&out));
}

#[test]
fn incompatible_algorithm_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = mbe(dir.path(), &["simulate", "--env", "cascade:L=6:K=2", "--alg", "ts:bernoulli", "--T", "10"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("blocker"), "x").unwrap();
    let mut args = SMALL.to_vec();
    args.extend(["--aggregate", "blocker/agg.csv"]);
    let out = mbe(dir.path(), &args);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let meta = std::fs::read_to_string(dir.path().join("exp_metadata.txt")).unwrap();
    assert!(meta.contains("failed"), "{meta}");
}

#[test]
fn spec_examples_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = mbe(
        dir.path(),
        &[
            "simulate", "--env", "mab:bernoulli:K=10:alpha=1", "--alg", "mbe:lambda=0.5:sigma=1:B=50", "--alg",
            "ts:bernoulli", "--T", "300", "--runs", "3", "--seed", "1", "--id", "a",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = mbe(
        dir.path(),
        &["simulate", "--env", "lin:p=10:K=100", "--alg", "mbe", "--T", "200", "--runs", "2", "--id", "b"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for env in ["cascade:L=30:K=4", "semi:L=30:K=4", "mnl:L=30:K=4"] {
        let out = mbe(
            dir.path(),
            &["simulate", "--env", env, "--alg", "mbe", "--alg", "phe", "--alg", "eg", "--T", "200", "--runs", "2", "--id", "c"],
        );
        assert_eq!(code(&out), 0, "{env}: {}", stderr(&out));
    }
}

#[test]
fn sweep_writes_table_and_best_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = mbe(
        dir.path(),
        &[
            "sweep", "--env", "mab:bernoulli:K=3:alpha=1", "--alg", "eg", "--alg", "oracle", "--grid", "0.5,2", "--T",
            "100", "--runs", "3", "--id", "sw",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = std::fs::read_to_string(dir.path().join("sw_sweep.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "experiment_id,algorithm,value,final_mean_regret,stderr,best");
    // Two grid points for eg, one untuned row for the oracle.
    assert_eq!(lines.len(), 4, "{table}");
    assert_eq!(lines.iter().filter(|l| l.ends_with(",true")).count(), 2);
    let agg = read_aggregate_csv(&dir.path().join("sw_aggregate.csv")).unwrap();
    assert_eq!(agg.series.len(), 2);
}

#[test]
fn theorycheck_reports_and_exits_3_on_failed_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = mbe(dir.path(), &["theorycheck", "--seed", "1", "--csv", "t.csv"]);
    // The displayed-variance CLT check fails by construction.
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("gaussian_tail"), "{stdout}");
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(csv.lines().count() > 10);
}

#[test]
fn plot_renders_svg_from_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&mbe(dir.path(), SMALL)), 0);
    let out = mbe(
        dir.path(),
        &["plot", "--input", "exp_aggregate.csv", "--output", "fig/r.svg", "--title", "demo", "--log-x"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let svg = std::fs::read_to_string(dir.path().join("fig/r.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let means = doc.descendants().filter(|n| n.attribute("class") == Some("mean")).count();
    assert_eq!(means, 2);
    let out = mbe(dir.path(), &["plot", "--input", "nope.csv", "--output", "x.svg"]);
    assert_ne!(code(&out), 0);
}

#[test]
fn help_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let out = mbe(dir.path(), &["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["simulate", "sweep", "theorycheck", "plot"] {
        assert!(text.contains(sub), "{text}");
    }
}
