//! Full-resample MBE for multi-armed bandits.
//!
//! Each call draws a fresh weight triplet for every stored observation, so
//! a round costs `O(t)`. [`super::ensemble`] is the `O(B)` approximation.

use rand::Rng;

use super::{select_argmax, Score};
use crate::envs::{Action, Feedback};
use crate::error::Result;
use crate::policy::Policy;
use crate::rng::RngStream;
use crate::weights::{TuningParams, WeightDistribution, WeightTriplet};

/// Observed rewards of one arm, in arrival order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ArmHistory {
    rewards: Vec<f64>,
}

impl ArmHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rewards(rewards: Vec<f64>) -> Self {
        Self { rewards }
    }

    pub fn push(&mut self, reward: f64) {
        self.rewards.push(reward);
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn count(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// `Σ(ω R + λω′) / Σ(ω + λω′ + λω″)` for explicit weights.
pub fn weighted_ratio<I>(rewards: &[f64], weights: I, lambda: f64) -> Score
where
    I: IntoIterator<Item = WeightTriplet>,
{
    let mut num = 0.0;
    let mut den = 0.0;
    let mut n = 0;
    for (r, w) in rewards.iter().zip(weights) {
        num += w.omega * r + lambda * w.omega_prime;
        den += w.omega + lambda * w.omega_prime + lambda * w.omega_dprime;
        n += 1;
    }
    assert_eq!(n, rewards.len(), "one weight triplet per reward");
    Score::ratio(num, den)
}

/// One arm's MBE score with freshly drawn weights; `+∞` if never pulled.
pub fn mbe_arm_score<R: Rng + ?Sized>(
    history: &ArmHistory,
    params: &TuningParams,
    rng: &mut R,
) -> Score {
    if history.is_empty() {
        return Score::UNSEEN;
    }
    let lambda = params.lambda;
    let dist = params.dist;
    let mut num = 0.0;
    let mut den = 0.0;
    for &r in history.rewards() {
        let w = dist.sample_triplet(rng);
        num += w.omega * r + lambda * w.omega_prime;
        den += w.omega + lambda * w.omega_prime + lambda * w.omega_dprime;
    }
    Score::ratio(num, den)
}

pub fn mbe_mab_scores<R: Rng + ?Sized>(
    histories: &[ArmHistory],
    params: &TuningParams,
    rng: &mut R,
) -> Vec<Score> {
    histories
        .iter()
        .map(|h| mbe_arm_score(h, params, rng))
        .collect()
}

/// Weighted mean `Σ ω R / Σ ω` with no pseudo-rewards; `+∞` if never pulled.
pub fn naive_arm_score<R: Rng + ?Sized>(
    history: &ArmHistory,
    dist: &WeightDistribution,
    rng: &mut R,
) -> Score {
    if history.is_empty() {
        return Score::UNSEEN;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &r in history.rewards() {
        let w = dist.sample(rng);
        num += w * r;
        den += w;
    }
    Score::ratio(num, den)
}

pub fn naive_mb_scores<R: Rng + ?Sized>(
    histories: &[ArmHistory],
    dist: &WeightDistribution,
    rng: &mut R,
) -> Vec<Score> {
    histories
        .iter()
        .map(|h| naive_arm_score(h, dist, rng))
        .collect()
}

/// Greedy on full-resample scores each round. With `naive` set the
/// pseudo-rewards are dropped and only `ω` is drawn.
#[derive(Clone, Debug)]
pub struct ExactMabPolicy {
    histories: Vec<ArmHistory>,
    params: TuningParams,
    naive: bool,
    scores: Vec<Score>,
}

impl ExactMabPolicy {
    pub fn new(arms: usize, params: TuningParams) -> Self {
        Self {
            histories: vec![ArmHistory::new(); arms],
            params,
            naive: false,
            scores: Vec::with_capacity(arms),
        }
    }

    pub fn naive(arms: usize, dist: WeightDistribution) -> Self {
        Self {
            naive: true,
            ..Self::new(arms, TuningParams { lambda: 0.0, dist })
        }
    }

    pub fn histories(&self) -> &[ArmHistory] {
        &self.histories
    }
}

impl Policy for ExactMabPolicy {
    fn select(&mut self, _t: usize, rng: &mut RngStream) -> Action {
        self.scores.clear();
        for h in &self.histories {
            let s = if self.naive {
                naive_arm_score(h, &self.params.dist, rng)
            } else {
                mbe_arm_score(h, &self.params, rng)
            };
            self.scores.push(s);
        }
        Action::Arm(select_argmax(&self.scores, rng))
    }

    fn update(&mut self, action: &Action, feedback: &Feedback, _rng: &mut RngStream) -> Result<()> {
        let Feedback::Reward(r) = feedback else {
            panic!("multi-armed policy got {feedback:?}");
        };
        self.histories[action.arm()].push(*r);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn unit_weights_give_shifted_mean() {
        let rewards = [0.4, 0.1, 0.7, 0.4];
        let s = weighted_ratio(&rewards, std::iter::repeat(WeightTriplet::ONES), 0.5);
        assert!((s.value - 0.45).abs() < 1e-15);
    }

    #[test]
    fn single_observation_hand_value() {
        let s = weighted_ratio(&[1.0], [WeightTriplet::new(2.0, 1.0, 1.0)], 0.5);
        assert!((s.value - 2.5 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_reward_without_pseudo_rewards_scores_zero() {
        let mut rng = RngStream::new(1);
        let h = ArmHistory::from_rewards(vec![0.0]);
        let params = TuningParams::new(0.0, WeightDistribution::ExponentialUnit).unwrap();
        for _ in 0..100 {
            assert_eq!(mbe_arm_score(&h, &params, &mut rng).value, 0.0);
            assert_eq!(
                naive_arm_score(&h, &WeightDistribution::gaussian(1.0).unwrap(), &mut rng).value,
                0.0
            );
        }
    }

    #[test]
    fn naive_with_unit_weights_is_sample_mean() {
        let rewards = [0.2, 0.9, 0.4];
        let s = weighted_ratio(&rewards, std::iter::repeat(WeightTriplet::ONES), 0.0);
        assert!((s.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn naive_equals_lambda_zero_on_same_weights() {
        let rewards = [0.3, 1.0, 0.0, 0.8];
        let omegas = [0.5, 1.7, 2.0, 0.1];
        let naive = {
            let num: f64 = rewards.iter().zip(&omegas).map(|(r, w)| r * w).sum();
            num / omegas.iter().sum::<f64>()
        };
        let triplets = omegas.iter().map(|&w| WeightTriplet::new(w, 9.0, 7.0));
        let s = weighted_ratio(&rewards, triplets, 0.0);
        assert_eq!(s.value, naive);
    }

    #[test]
    fn unpulled_arms_are_unseen_and_zero_mass_is_undefined() {
        let mut rng = RngStream::new(2);
        let params = TuningParams::new(0.5, WeightDistribution::DoubleOrNothing).unwrap();
        let h = [ArmHistory::new(), ArmHistory::from_rewards(vec![1.0])];
        let scores = mbe_mab_scores(&h, &params, &mut rng);
        assert!(scores[0].is_unseen());
        let s = weighted_ratio(&[1.0], [WeightTriplet::new(0.0, 0.0, 0.0)], 0.5);
        assert!(!s.defined);
    }

    #[test]
    fn negative_denominator_kept_raw() {
        let s = weighted_ratio(&[1.0], [WeightTriplet::new(-2.0, 0.5, 0.5)], 0.5);
        assert!(s.defined);
        assert!((s.value - (-2.0 + 0.25) / (-2.0 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn concentrates_at_shifted_mean() {
        // 10^5 Bernoulli(0.3) rewards, Gaussian(1, 1) weights, λ = 0.5.
        // Conditional on the rewards the score's sd is about
        // σ_ω sqrt(σ_R² + (R̄-c)² + λ²((1-c)² + c²)) / ((1+2λ) sqrt(s)).
        let mut rng = RngStream::new(3);
        let s = 100_000;
        let rewards: Vec<f64> = (0..s).map(|_| f64::from(u8::from(rng.random::<f64>() < 0.3))).collect();
        let h = ArmHistory::from_rewards(rewards);
        let params = TuningParams::new(0.5, WeightDistribution::gaussian(1.0).unwrap()).unwrap();
        let target = (0.3 + 0.5) / 2.0;
        let predicted_sd = ((0.21 + 2.0) / 4.0 / s as f64).sqrt();
        for _ in 0..5 {
            let score = mbe_arm_score(&h, &params, &mut rng).value;
            assert!((score - target).abs() < 5.0 * predicted_sd, "{score}");
        }
    }

    proptest::proptest! {
        #[test]
        fn unit_weights_preserve_order(
            means in proptest::collection::vec(0.0f64..1.0, 2..12),
            lambda in 1e-3f64..10.0,
        ) {
            let shifted: Vec<f64> = means
                .iter()
                .map(|&m| weighted_ratio(&[m], [WeightTriplet::ONES], lambda).value)
                .collect();
            for (m, s) in means.iter().zip(&shifted) {
                proptest::prop_assert!((s - (m + lambda) / (1.0 + 2.0 * lambda)).abs() < 1e-12);
            }
            let argmax = |xs: &[f64]| {
                let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                xs.iter().enumerate().filter(|(_, &x)| x == max).map(|(i, _)| i).collect::<Vec<_>>()
            };
            proptest::prop_assert_eq!(argmax(&means), argmax(&shifted));
        }
    }
}
