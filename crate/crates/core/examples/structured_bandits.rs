//! Cascading, semi-bandit and MNL problems share one per-item estimator;
//! only the slate assembly differs.

use mbe::simulator::{run_experiment, SimConfig};

fn main() -> mbe::Result<()> {
    let algs = [
        "mbe:lambda=0.5:sigma=1:B=50",
        "mbe:lambda=0.5:sigma=0.5:B=50",
        "eg:a=5",
        "phe:a=0.5",
    ];
    for env in ["cascade:L=30:K=4", "semi:L=30:K=4", "mnl:L=30:K=4"] {
        let mut cfg = SimConfig::new(
            env.parse()?,
            algs.iter().map(|a| a.parse()).collect::<mbe::Result<_>>()?,
            3000,
            20,
            11,
        );
        cfg.stride = Some(1500);
        let res = run_experiment(&cfg)?;
        println!("{env}");
        for s in &res.aggregate.series {
            println!(
                "  {:<32} regret@1500 {:>8.2}  regret@3000 {:>8.2} ± {:.2}",
                s.algorithm,
                s.mean[0],
                s.final_mean(),
                s.final_stderr()
            );
        }
    }
    Ok(())
}
