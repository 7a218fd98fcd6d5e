//! Tune each algorithm's main parameter over 2^(k-4), k = 0..6, and keep
//! the best curve. Untunable algorithms run once.

use mbe::simulator::{default_grid, sweep, SimConfig};

fn main() -> mbe::Result<()> {
    let cfg = SimConfig::new(
        "mab:gauss:K=10".parse()?,
        vec!["mbe:B=20".parse()?, "phe".parse()?, "eg".parse()?, "ts:gauss:prior=calibrated".parse()?],
        1000,
        20,
        5,
    );
    let report = sweep(&cfg, &default_grid())?;
    for e in &report.entries {
        print!("{:<28}", e.base.to_string());
        for p in &e.points {
            print!(" {}:{:.1}", p.value, p.final_mean);
        }
        match e.best_value {
            Some(v) => println!("  -> best {v}"),
            None => println!("  (untuned) {:.1}", e.best_series.final_mean()),
        }
    }
    Ok(())
}
