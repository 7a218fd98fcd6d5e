use rand::Rng;
use rand_distr::{Beta, Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};

/// Reward family of a multi-armed bandit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RewardFamily {
    Bernoulli,
    Gaussian { noise_sd: f64 },
    Exponential,
}

/// K-armed bandit with fixed means in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MabEnv {
    means: Vec<f64>,
    family: RewardFamily,
}

impl MabEnv {
    pub fn new(means: Vec<f64>, family: RewardFamily) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::config("bandit needs at least one arm"));
        }
        if let Some(m) = means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(Error::config(format!("arm mean {m} outside [0, 1]")));
        }
        match family {
            RewardFamily::Gaussian { noise_sd } if !(noise_sd > 0.0) => {
                return Err(Error::config(format!("noise sd must be positive, got {noise_sd}")));
            }
            RewardFamily::Exponential if means.iter().any(|&m| m <= 0.0) => {
                return Err(Error::config("exponential arms need positive means"));
            }
            _ => {}
        }
        Ok(Self { means, family })
    }

    /// `k` means drawn i.i.d. from `Beta(alpha, 8)`.
    pub fn sample<R: Rng + ?Sized>(
        k: usize,
        alpha: f64,
        family: RewardFamily,
        rng: &mut R,
    ) -> Result<Self> {
        if k < 2 {
            return Err(Error::config(format!("need at least 2 arms, got {k}")));
        }
        let beta = Beta::new(alpha, 8.0)
            .map_err(|e| Error::config(format!("bad Beta({alpha}, 8): {e}")))?;
        let means = (0..k)
            .map(|_| loop {
                let m: f64 = beta.sample(rng);
                // Exponential arms cannot have a zero mean.
                if m > 0.0 || family != RewardFamily::Exponential {
                    break m;
                }
            })
            .collect();
        Self::new(means, family)
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn family(&self) -> RewardFamily {
        self.family
    }

    pub fn n_arms(&self) -> usize {
        self.means.len()
    }

    pub fn pull<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> f64 {
        let mu = self.means[arm];
        match self.family {
            RewardFamily::Bernoulli => {
                if rng.random::<f64>() < mu {
                    1.0
                } else {
                    0.0
                }
            }
            RewardFamily::Gaussian { noise_sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mu + noise_sd * z
            }
            RewardFamily::Exponential => {
                let e: f64 = Exp1.sample(rng);
                mu * e
            }
        }
    }

    pub fn best_arm(&self) -> usize {
        let mut best = 0;
        for (k, &m) in self.means.iter().enumerate() {
            if m > self.means[best] {
                best = k;
            }
        }
        best
    }

    pub fn optimal_value(&self) -> f64 {
        self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn beta_one_eight_population_mean() {
        let mut rng = RngStream::new(1);
        let n = 10_000;
        let mut all = Vec::with_capacity(n * 10);
        for _ in 0..n {
            let env = MabEnv::sample(10, 1.0, RewardFamily::Bernoulli, &mut rng).unwrap();
            assert!(env.means().iter().all(|&m| m > 0.0 && m < 1.0));
            all.extend_from_slice(env.means());
        }
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        // Beta(1, 8): mean 1/9, variance 8 / (81 * 10).
        let stderr = (8.0f64 / 810.0 / all.len() as f64).sqrt();
        assert!((mean - 1.0 / 9.0).abs() < 3.0 * stderr, "mean {mean}");
    }

    #[test]
    fn huge_alpha_concentrates_at_one() {
        let mut rng = RngStream::new(2);
        let env = MabEnv::sample(2, 1e6, RewardFamily::Bernoulli, &mut rng).unwrap();
        assert!(env.means().iter().all(|&m| (m - 1.0).abs() < 1e-3));
    }

    #[test]
    fn instance_replays() {
        let a = MabEnv::sample(10, 1.0, RewardFamily::Bernoulli, &mut RngStream::at(3, vec![4])).unwrap();
        let b = MabEnv::sample(10, 1.0, RewardFamily::Bernoulli, &mut RngStream::at(3, vec![4])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_instances() {
        let mut rng = RngStream::new(0);
        assert!(MabEnv::sample(1, 1.0, RewardFamily::Bernoulli, &mut rng).is_err());
        assert!(MabEnv::new(vec![1.2], RewardFamily::Bernoulli).is_err());
        assert!(MabEnv::new(vec![0.0, 0.5], RewardFamily::Exponential).is_err());
        assert!(MabEnv::new(vec![0.5], RewardFamily::Gaussian { noise_sd: 0.0 }).is_err());
    }

    #[test]
    fn degenerate_bernoulli_always_pays() {
        let env = MabEnv::new(vec![0.2, 1.0], RewardFamily::Bernoulli).unwrap();
        let mut rng = RngStream::new(5);
        assert!((0..1000).all(|_| env.pull(1, &mut rng) == 1.0));
    }

    #[test]
    fn gaussian_pull_mean() {
        let env = MabEnv::new(vec![0.3], RewardFamily::Gaussian { noise_sd: 1.0 }).unwrap();
        let mut rng = RngStream::new(6);
        let n = 100_000;
        let mean = (0..n).map(|_| env.pull(0, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.3).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn exponential_pull_mean() {
        let env = MabEnv::new(vec![0.25], RewardFamily::Exponential).unwrap();
        let mut rng = RngStream::new(7);
        let n = 100_000;
        let mean = (0..n).map(|_| env.pull(0, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.25).abs() < 3.0 * 0.25 / (n as f64).sqrt());
    }

    #[test]
    fn optimal_is_max_mean() {
        let env = MabEnv::new(vec![0.2, 0.7, 0.5], RewardFamily::Bernoulli).unwrap();
        assert_eq!(env.optimal_value(), 0.7);
        assert_eq!(env.best_arm(), 1);
    }
}
