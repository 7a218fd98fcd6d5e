//! Linear bandit: every replicate keeps a weighted ridge estimate updated
//! in O(p^2) per observation.

use mbe::mbe::{LinearReplicate, PseudoTerm};
use mbe::simulator::{run_experiment, SimConfig};
use mbe::weights::WeightDistribution;
use mbe::RngStream;
use nalgebra::DVector;

fn main() -> mbe::Result<()> {
    // One replicate by hand: recover theta from noiseless data.
    let theta = DVector::from_vec(vec![0.3, -0.2, 0.8]);
    let dist = WeightDistribution::gaussian(0.5)?;
    let mut rng = RngStream::new(1);
    let mut rep = LinearReplicate::new(3, 0.1);
    for i in 0..400 {
        let x = DVector::from_fn(3, |j, _| ((i * 7 + j * 3) % 11) as f64 / 10.0);
        let r = x.dot(&theta);
        rep.update(&x, r, dist.sample_triplet(&mut rng), 0.0, PseudoTerm::Identity)?;
    }
    println!("theta_hat = {:.3?}, reinversions = {}", rep.theta().as_slice(), rep.reinversions());

    // Full experiment on the synthetic low-rank instance. The best arm has
    // mean exactly one, so its rewards never fail and MBE settles on it
    // soon after the first p forced pulls.
    let cfg = SimConfig::new(
        "lin:p=10:K=100".parse()?,
        vec![
            "mbe:lambda=0.5:sigma=1:B=20".parse()?,
            "uniform".parse()?,
        ],
        2000,
        10,
        8,
    );
    for s in &run_experiment(&cfg)?.aggregate.series {
        println!("{:<32} {:>9.2} ± {:.2}", s.algorithm, s.final_mean(), s.final_stderr());
    }
    Ok(())
}
