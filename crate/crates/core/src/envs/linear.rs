use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

/// Rank of the loading matrix used for the low-rank block of arms.
pub const LOW_RANK: usize = 5;

/// Fixed-arm linear bandit with Bernoulli rewards of mean `x_kᵀθ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinEnv {
    theta: DVector<f64>,
    features: Vec<DVector<f64>>,
    means: Vec<f64>,
    low_rank_arms: usize,
}

impl LinEnv {
    pub fn new(theta: DVector<f64>, features: Vec<DVector<f64>>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::config("linear bandit needs at least one arm"));
        }
        if features.iter().any(|x| x.len() != theta.len()) {
            return Err(Error::config("feature length differs from theta length"));
        }
        let means: Vec<f64> = features.iter().map(|x| x.dot(&theta)).collect();
        // Allow rounding from the rescaling step.
        if let Some(m) = means.iter().find(|m| !(-1e-12..=1.0 + 1e-12).contains(*m)) {
            return Err(Error::config(format!("arm mean {m} outside [0, 1]")));
        }
        let means = means.into_iter().map(|m| m.clamp(0.0, 1.0)).collect();
        Ok(Self {
            theta,
            features,
            means,
            low_rank_arms: 0,
        })
    }

    /// Random instance: 90% of arms are `A b` with one loading matrix
    /// `A ~ U(0,1)^{p×5}` and a fresh `b ~ U(0,1)^5` per arm, the rest are
    /// dense `U(0,1)^p`. `θ ~ U(0,1)^p`, and all features are divided by
    /// `max_k x_kᵀθ` so the best arm has mean exactly one.
    pub fn sample<R: Rng + ?Sized>(p: usize, k: usize, rng: &mut R) -> Result<Self> {
        if p < LOW_RANK {
            return Err(Error::config(format!(
                "linear instance needs p >= {LOW_RANK} for the low-rank block, got {p}"
            )));
        }
        if k < p {
            return Err(Error::config(format!("need K >= p, got K={k}, p={p}")));
        }
        let low_rank_arms = (k * 9 + 5) / 10;
        let loading = DMatrix::from_fn(p, LOW_RANK, |_, _| rng.random::<f64>());
        let mut features = Vec::with_capacity(k);
        for _ in 0..low_rank_arms {
            let b = DVector::from_fn(LOW_RANK, |_, _| rng.random::<f64>());
            features.push(&loading * b);
        }
        for _ in low_rank_arms..k {
            features.push(DVector::from_fn(p, |_, _| rng.random::<f64>()));
        }
        let theta = DVector::from_fn(p, |_, _| rng.random::<f64>());
        let scale = features
            .iter()
            .map(|x| x.dot(&theta))
            .fold(f64::NEG_INFINITY, f64::max);
        if !(scale > 0.0) {
            return Err(Error::Numeric("degenerate linear instance".into()));
        }
        for x in &mut features {
            *x /= scale;
        }
        let mut env = Self::new(theta, features)?;
        env.low_rank_arms = low_rank_arms;
        Ok(env)
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn n_arms(&self) -> usize {
        self.features.len()
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn features(&self) -> &[DVector<f64>] {
        &self.features
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Number of leading arms built from the shared loading matrix.
    pub fn low_rank_arms(&self) -> usize {
        self.low_rank_arms
    }

    pub fn pull<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> f64 {
        if rng.random::<f64>() < self.means[arm] {
            1.0
        } else {
            0.0
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
        self.means[self.best_arm()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn ninety_percent_low_rank_layout() {
        let env = LinEnv::sample(10, 100, &mut RngStream::new(1)).unwrap();
        assert_eq!(env.low_rank_arms(), 90);
        assert_eq!(env.n_arms(), 100);
        assert!((env.optimal_value() - 1.0).abs() < 1e-12);
        assert!(env.means().iter().all(|&m| (0.0..=1.0).contains(&m)));
    }

    #[test]
    fn low_rank_block_has_rank_at_most_five() {
        let env = LinEnv::sample(8, 40, &mut RngStream::new(2)).unwrap();
        let block = DMatrix::from_columns(&env.features()[..env.low_rank_arms()]);
        assert!(block.rank(1e-9) <= LOW_RANK);
        let small = LinEnv::sample(5, 10, &mut RngStream::new(3)).unwrap();
        let block = DMatrix::from_columns(&small.features()[..small.low_rank_arms()]);
        assert!(block.rank(1e-9) <= LOW_RANK);
    }

    #[test]
    fn rescaling_recomputed_directly() {
        let env = LinEnv::sample(12, 100, &mut RngStream::new(4)).unwrap();
        let max = env
            .features()
            .iter()
            .map(|x| x.dot(env.theta()))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_small_p_or_k() {
        let mut rng = RngStream::new(0);
        assert!(LinEnv::sample(4, 100, &mut rng).is_err());
        assert!(LinEnv::sample(10, 9, &mut rng).is_err());
    }
}
