//! Write raw and aggregate CSVs and an SVG plot, then read them back.
//!
//! cargo run --release --example csv_and_plot [out_dir]

use std::path::PathBuf;

use mbe::output::{read_aggregate_csv, read_raw_csv, write_aggregate_csv, write_raw_csv};
use mbe::plot::{write_svg, PlotOptions};
use mbe::simulator::{run_experiment, SimConfig};

fn main() -> mbe::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "mbe_out".into()));
    let mut cfg = SimConfig::new(
        "mab:bernoulli:K=5:alpha=1".parse()?,
        vec!["mbe".parse()?, "ts:bernoulli".parse()?, "eg:a=1".parse()?],
        2000,
        20,
        1,
    );
    cfg.experiment_id = "demo".into();
    let res = run_experiment(&cfg)?;
    let (raw, agg, svg) = (out.join("raw.csv"), out.join("aggregate.csv"), out.join("regret.svg"));
    write_raw_csv(&cfg.experiment_id, &res, &raw)?;
    write_aggregate_csv(&res.aggregate, &agg)?;
    let opts = PlotOptions {
        log_x: false,
        log_y: false,
        title: Some("Bernoulli K=5".into()),
    };
    write_svg(&res.aggregate, &svg, &opts)?;
    assert_eq!(read_aggregate_csv(&agg)?, res.aggregate);
    println!("{} raw rows, plot at {}", read_raw_csv(&raw)?.len(), svg.display());
    Ok(())
}
