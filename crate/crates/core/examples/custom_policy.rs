//! Plug a hand-written policy into the episode runner next to MBE.

use mbe::simulator::run_episode;
use mbe::{Action, AlgSpec, EnvSpec, Feedback, Policy, RngStream};

/// UCB1 on rewards in [0, 1].
struct Ucb1 {
    sums: Vec<f64>,
    counts: Vec<f64>,
}

impl Policy for Ucb1 {
    fn select(&mut self, t: usize, _rng: &mut RngStream) -> Action {
        if let Some(k) = self.counts.iter().position(|&c| c == 0.0) {
            return Action::Arm(k);
        }
        let bonus = |k: usize| (2.0 * (t as f64).ln() / self.counts[k]).sqrt();
        let ucb = |k: usize| self.sums[k] / self.counts[k] + bonus(k);
        let best = (0..self.counts.len()).max_by(|&a, &b| ucb(a).total_cmp(&ucb(b))).unwrap();
        Action::Arm(best)
    }

    fn update(&mut self, action: &Action, feedback: &Feedback, _rng: &mut RngStream) -> mbe::Result<()> {
        let (Action::Arm(k), Feedback::Reward(r)) = (action, feedback) else {
            unreachable!("multi-armed only")
        };
        self.sums[*k] += r;
        self.counts[*k] += 1.0;
        Ok(())
    }
}

fn main() -> mbe::Result<()> {
    let spec: EnvSpec = "mab:bernoulli:K=10:alpha=1".parse()?;
    let alg: AlgSpec = "mbe".parse()?;
    let (mut ucb_total, mut mbe_total) = (0.0, 0.0);
    let runs = 20;
    for run in 0..runs {
        let root = RngStream::at(42, vec![run]);
        let env = spec.instantiate(&mut root.derive(0))?;
        let mut ucb = Ucb1 {
            sums: vec![0.0; env.n_items()],
            counts: vec![0.0; env.n_items()],
        };
        ucb_total += run_episode(&env, &mut ucb, 3000, &root.derive(1))?.last();
        mbe_total += run_episode(&env, alg.build(&env, &spec)?.as_mut(), 3000, &root.derive(2))?.last();
    }
    println!("UCB1 {:.1}, MBE {:.1}", ucb_total / runs as f64, mbe_total / runs as f64);
    Ok(())
}
