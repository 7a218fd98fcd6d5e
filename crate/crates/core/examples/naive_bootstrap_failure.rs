//! Bootstrapping without pseudo-rewards can lock onto the worse arm.
//!
//! Two Bernoulli arms, 0.8 and 0.5. If the first pull of the good arm
//! returns 0, its weighted mean stays 0 forever and it is never tried
//! again. MBE adds a 0 and a 1 pseudo-reward per observation, which keeps
//! the score away from that trap.

use mbe::simulator::{run_episode, SimConfig};
use mbe::{Action, AlgSpec, EnvSpec, RngStream};

fn main() -> mbe::Result<()> {
    let spec: EnvSpec = "mab:bernoulli:means=0.8,0.5".parse()?;
    let runs = 2000;
    let horizon = 500;
    for label in ["naive-mb:dist=exp", "mbe:lambda=0.5:sigma=1:B=50"] {
        let alg: AlgSpec = label.parse()?;
        let (mut stuck, mut regret) = (0, 0.0);
        for run in 0..runs {
            let root = RngStream::at(3, vec![run]);
            let env = spec.instantiate(&mut root.derive(0))?;
            let mut policy = alg.build(&env, &spec)?;
            // Count pulls of the good arm by wrapping the episode loop.
            let mut good = 0;
            let mut counting = Counting { inner: policy.as_mut(), good: &mut good };
            regret += run_episode(&env, &mut counting, horizon, &root.derive(1))?.last();
            stuck += usize::from(good == 1);
        }
        println!(
            "{label:<32} P(good arm pulled once) = {:.3}, mean regret {:.1}",
            stuck as f64 / runs as f64,
            regret / runs as f64
        );
    }
    // The same comparison through the experiment runner.
    let cfg = SimConfig::new(spec, vec!["naive-mb:dist=exp".parse()?, "mbe".parse()?], horizon, 200, 3);
    let res = mbe::simulator::run_experiment(&cfg)?;
    for s in &res.aggregate.series {
        println!("runner: {:<24} {:.1} ± {:.1}", s.algorithm, s.final_mean(), s.final_stderr());
    }
    Ok(())
}

struct Counting<'a> {
    inner: &'a mut dyn mbe::Policy,
    good: &'a mut usize,
}

impl mbe::Policy for Counting<'_> {
    fn select(&mut self, t: usize, rng: &mut RngStream) -> Action {
        let a = self.inner.select(t, rng);
        *self.good += usize::from(a == Action::Arm(0));
        a
    }

    fn update(&mut self, a: &Action, fb: &mbe::Feedback, rng: &mut RngStream) -> mbe::Result<()> {
        self.inner.update(a, fb, rng)
    }
}
