//! MBE against Thompson sampling on Bernoulli arms with Beta(1, 8) means.
//!
//! cargo run --release --example mab_vs_thompson [T] [runs]

use mbe::simulator::{run_experiment, SimConfig};

fn main() -> mbe::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer"));
    let horizon = args.next().unwrap_or(5000);
    let runs = args.next().unwrap_or(50);
    let algs = ["mbe:lambda=0.5:sigma=1:B=50", "ts:bernoulli", "phe:a=0.5", "eg:a=1", "uniform"];
    let cfg = SimConfig::new(
        "mab:bernoulli:K=10:alpha=1".parse()?,
        algs.iter().map(|a| a.parse()).collect::<mbe::Result<_>>()?,
        horizon,
        runs,
        2024,
    );
    let res = run_experiment(&cfg)?;
    println!("{runs} runs, T={horizon}, {}", cfg.env);
    for s in &res.aggregate.series {
        println!("{:<32} {:>10.2} ± {:.2}", s.algorithm, s.final_mean(), s.final_stderr());
    }
    Ok(())
}
