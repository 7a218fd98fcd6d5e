use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::envs::{Action, Feedback};
use crate::error::Result;
use crate::mbe::{select_argmax, Score};
use crate::policy::Policy;
use crate::rng::RngStream;

/// Independent `Beta(α_k, β_k)` posteriors for Bernoulli arms.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaPosterior {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl BetaPosterior {
    pub fn new(arms: usize, prior_alpha: f64, prior_beta: f64) -> Self {
        assert!(prior_alpha > 0.0 && prior_beta > 0.0, "Beta prior needs positive parameters");
        Self {
            alpha: vec![prior_alpha; arms],
            beta: vec![prior_beta; arms],
        }
    }

    pub fn params(&self, arm: usize) -> (f64, f64) {
        (self.alpha[arm], self.beta[arm])
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.alpha[arm] / (self.alpha[arm] + self.beta[arm])
    }

    pub fn sample<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> f64 {
        Beta::new(self.alpha[arm], self.beta[arm])
            .expect("posterior parameters stay positive")
            .sample(rng)
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let draws: Vec<Score> = (0..self.alpha.len())
            .map(|k| Score::new(self.sample(k, rng)))
            .collect();
        select_argmax(&draws, rng)
    }

    /// Panics on a reward other than 0 or 1.
    pub fn update(&mut self, arm: usize, reward: f64) {
        if reward == 1.0 {
            self.alpha[arm] += 1.0;
        } else if reward == 0.0 {
            self.beta[arm] += 1.0;
        } else {
            panic!("Beta-Bernoulli posterior fed non-binary reward {reward}");
        }
    }
}

/// Normal posteriors on arm means with known noise sd.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPosterior {
    mean: Vec<f64>,
    precision: Vec<f64>,
    noise_sd: f64,
}

impl GaussianPosterior {
    pub fn new(arms: usize, prior_mean: f64, prior_sd: f64, noise_sd: f64) -> Self {
        assert!(prior_sd > 0.0 && noise_sd > 0.0);
        Self {
            mean: vec![prior_mean; arms],
            precision: vec![prior_sd.powi(-2); arms],
            noise_sd,
        }
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.mean[arm]
    }

    pub fn precision(&self, arm: usize) -> f64 {
        self.precision[arm]
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let draws: Vec<Score> = (0..self.mean.len())
            .map(|k| {
                let z: f64 = StandardNormal.sample(rng);
                Score::new(self.mean[k] + z / self.precision[k].sqrt())
            })
            .collect();
        select_argmax(&draws, rng)
    }

    pub fn update(&mut self, arm: usize, reward: f64) {
        let obs_precision = self.noise_sd.powi(-2);
        let new_precision = self.precision[arm] + obs_precision;
        self.mean[arm] =
            (self.mean[arm] * self.precision[arm] + reward * obs_precision) / new_precision;
        self.precision[arm] = new_precision;
    }
}

#[derive(Clone, Debug)]
pub enum ThompsonPolicy {
    Bernoulli(BetaPosterior),
    Gaussian(GaussianPosterior),
}

impl Policy for ThompsonPolicy {
    fn select(&mut self, _t: usize, rng: &mut RngStream) -> Action {
        Action::Arm(match self {
            ThompsonPolicy::Bernoulli(p) => p.select(rng),
            ThompsonPolicy::Gaussian(p) => p.select(rng),
        })
    }

    fn update(&mut self, action: &Action, feedback: &Feedback, _rng: &mut RngStream) -> Result<()> {
        let Feedback::Reward(r) = feedback else {
            panic!("Thompson sampling got {feedback:?}");
        };
        match self {
            ThompsonPolicy::Bernoulli(p) => p.update(action.arm(), *r),
            ThompsonPolicy::Gaussian(p) => p.update(action.arm(), *r),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_posterior_dominates() {
        let mut post = BetaPosterior::new(2, 1.0, 1.0);
        post.alpha[1] = 1e6;
        let mut rng = RngStream::new(1);
        let n = 10_000;
        let hits = (0..n).filter(|_| post.select(&mut rng) == 1).count();
        assert!(hits as f64 / n as f64 > 0.99);
    }

    #[test]
    fn conjugate_arithmetic() {
        let mut post = BetaPosterior::new(1, 1.0, 1.0);
        for r in [1.0, 1.0, 0.0] {
            post.update(0, r);
        }
        assert_eq!(post.params(0), (3.0, 2.0));
    }

    #[test]
    #[should_panic]
    fn non_binary_reward_is_a_contract_violation() {
        BetaPosterior::new(1, 1.0, 1.0).update(0, 0.5);
    }

    #[test]
    fn flat_gaussian_prior_gives_sample_mean() {
        let mut post = GaussianPosterior::new(1, 0.5, 1e12, 1.0);
        let xs = [0.3, 1.7, -0.2, 0.9, 0.4];
        let mut precision = post.precision(0);
        for x in xs {
            post.update(0, x);
            assert!(post.precision(0) > precision);
            precision = post.precision(0);
        }
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((post.mean(0) - mean).abs() < 1e-9);
    }

    proptest::proptest! {
        #[test]
        fn posterior_mean_within_prior_dilution(rewards in proptest::collection::vec(proptest::bool::ANY, 1..200)) {
            let mut post = BetaPosterior::new(1, 1.0, 1.0);
            for &r in &rewards {
                post.update(0, f64::from(u8::from(r)));
            }
            let s = rewards.len() as f64;
            let empirical = rewards.iter().filter(|&&r| r).count() as f64 / s;
            proptest::prop_assert!((post.mean(0) - empirical).abs() <= 2.0 / (s + 2.0) + 1e-15);
        }
    }
}
