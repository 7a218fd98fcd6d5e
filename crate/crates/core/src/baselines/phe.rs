use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Normal, Poisson};

use super::ItemStats;
use crate::envs::{Action, Feedback};
use crate::error::{Error, Result};
use crate::mbe::{select_argmax, Score};
use crate::policy::{FeedbackRouter, Policy, SlateShape};
use crate::rng::RngStream;

/// Distribution family of the pseudo-observations, mirroring the rewards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseFamily {
    Bernoulli,
    Gaussian { sd: f64 },
    Exponential,
    /// Counts, used for MNL purchase tallies.
    Poisson,
}

impl NoiseFamily {
    /// Sum of `m` i.i.d. draws with mean `mean`, drawn in O(1) from the
    /// exact distribution of the sum.
    pub fn sample_sum<R: Rng + ?Sized>(&self, mean: f64, m: u64, rng: &mut R) -> f64 {
        if m == 0 {
            return 0.0;
        }
        let n = m as f64;
        match *self {
            NoiseFamily::Bernoulli => {
                let p = mean.clamp(0.0, 1.0);
                Binomial::new(m, p).expect("p in [0, 1]").sample(rng) as f64
            }
            NoiseFamily::Gaussian { sd } => Normal::new(n * mean, sd * n.sqrt())
                .expect("finite sd")
                .sample(rng),
            NoiseFamily::Exponential => {
                if mean <= 0.0 {
                    0.0
                } else {
                    Gamma::new(n, mean).expect("positive shape and scale").sample(rng)
                }
            }
            NoiseFamily::Poisson => {
                let rate = n * mean;
                if rate <= 0.0 {
                    0.0
                } else {
                    Poisson::new(rate).expect("positive rate").sample(rng)
                }
            }
        }
    }
}

impl fmt::Display for NoiseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseFamily::Bernoulli => write!(f, "bernoulli"),
            NoiseFamily::Gaussian { sd } => write!(f, "gauss:{sd}"),
            NoiseFamily::Exponential => write!(f, "exp"),
            NoiseFamily::Poisson => write!(f, "poisson"),
        }
    }
}

impl FromStr for NoiseFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bernoulli" => Ok(NoiseFamily::Bernoulli),
            "exp" => Ok(NoiseFamily::Exponential),
            "poisson" => Ok(NoiseFamily::Poisson),
            _ => match s.strip_prefix("gauss:") {
                Some(sd) => {
                    let sd: f64 = sd
                        .parse()
                        .map_err(|_| Error::config(format!("bad noise sd `{sd}`")))?;
                    if !(sd.is_finite() && sd > 0.0) {
                        return Err(Error::config(format!("noise sd must be positive, got {sd}")));
                    }
                    Ok(NoiseFamily::Gaussian { sd })
                }
                None => Err(Error::config(format!("unknown noise family `{s}`"))),
            },
        }
    }
}

/// Number of pseudo-observations for an arm pulled `s` times.
pub fn pseudo_count(a: f64, s: u64) -> u64 {
    (a * s as f64).ceil() as u64
}

/// `(Σ R + Σ Z) / (s + m)`.
pub fn perturbed_mean(sum: f64, s: u64, pseudo_sum: f64, m: u64) -> f64 {
    (sum + pseudo_sum) / (s + m) as f64
}

/// Per-item sums and counts plus the perturbation scale.
#[derive(Clone, Debug)]
pub struct PheState {
    stats: ItemStats,
    a: f64,
    family: NoiseFamily,
}

impl PheState {
    pub fn new(items: usize, a: f64, family: NoiseFamily) -> Self {
        assert!(a > 0.0, "perturbation scale must be positive");
        Self {
            stats: ItemStats::new(items),
            a,
            family,
        }
    }

    pub fn stats(&self) -> &ItemStats {
        &self.stats
    }

    pub fn record(&mut self, item: usize, obs: f64) {
        self.stats.record(item, obs);
    }

    /// One perturbed mean per item; unpulled items score `+∞`.
    pub fn scores_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<Score>) {
        out.clear();
        for k in 0..self.stats.len() {
            let s = self.stats.counts[k];
            if s == 0 {
                out.push(Score::UNSEEN);
                continue;
            }
            let sum = self.stats.sums[k];
            let m = pseudo_count(self.a, s);
            let z = self.family.sample_sum(sum / s as f64, m, rng);
            out.push(Score::new(perturbed_mean(sum, s, z, m)));
        }
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut scores = Vec::with_capacity(self.stats.len());
        self.scores_into(rng, &mut scores);
        select_argmax(&scores, rng)
    }
}

/// Perturbed-history exploration for arms or slates.
#[derive(Clone, Debug)]
pub struct PhePolicy {
    state: PheState,
    shape: Option<SlateShape>,
    router: FeedbackRouter,
    scratch: Vec<Score>,
}

impl PhePolicy {
    pub fn new(items: usize, a: f64, family: NoiseFamily, shape: Option<SlateShape>) -> Self {
        Self {
            state: PheState::new(items, a, family),
            shape,
            router: FeedbackRouter::new(),
            scratch: Vec::with_capacity(items),
        }
    }

    pub fn state(&self) -> &PheState {
        &self.state
    }
}

impl Policy for PhePolicy {
    fn select(&mut self, _t: usize, rng: &mut RngStream) -> Action {
        if let Some(offer) = self.router.frozen_offer() {
            return Action::Slate(offer.to_vec());
        }
        self.state.scores_into(rng, &mut self.scratch);
        match &self.shape {
            None => Action::Arm(select_argmax(&self.scratch, rng)),
            Some(shape) => Action::Slate(shape.assemble(&self.scratch, rng)),
        }
    }

    fn update(&mut self, action: &Action, feedback: &Feedback, _rng: &mut RngStream) -> Result<()> {
        for (item, obs) in self.router.route(action, feedback) {
            self.state.record(item, obs);
        }
        Ok(())
    }
}

/// The tuning grid `2^(k-4)`, `k = 0..=6`.
pub const TUNING_GRID: [f64; 7] = [0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_perturbed_mean() {
        let m = pseudo_count(1.0, 2);
        assert_eq!(m, 2);
        assert_eq!(perturbed_mean(1.0 + 0.0, 2, 1.0 + 0.0, m), 0.5);
    }

    #[test]
    fn tiny_scale_still_adds_one_pseudo() {
        assert_eq!(pseudo_count(1e-9, 3), 1);
        assert_eq!(pseudo_count(1e-9, 0), 0);
    }

    #[test]
    fn zero_draws_shrink_the_mean() {
        let (sum, s, a) = (7.0, 10, 0.3);
        let m = pseudo_count(a, s);
        let rbar = sum / s as f64;
        assert_eq!(perturbed_mean(sum, s, 0.0, m), s as f64 * rbar / (s + m) as f64);
    }

    #[test]
    fn grid_is_powers_of_two() {
        for (k, g) in TUNING_GRID.iter().enumerate() {
            assert_eq!(*g, 2f64.powi(k as i32 - 4));
        }
    }

    #[test]
    fn unpulled_arms_are_forced() {
        let mut st = PheState::new(3, 1.0, NoiseFamily::Bernoulli);
        st.record(0, 1.0);
        st.record(2, 1.0);
        assert_eq!(st.select(&mut RngStream::new(3)), 1);
    }

    #[test]
    fn sum_shortcuts_match_moments() {
        let mut rng = RngStream::new(4);
        let n = 20_000;
        let m = 5;
        for (family, mean, var) in [
            (NoiseFamily::Bernoulli, 0.3, 0.21),
            (NoiseFamily::Gaussian { sd: 2.0 }, 0.3, 4.0),
            (NoiseFamily::Exponential, 0.5, 0.25),
            (NoiseFamily::Poisson, 0.4, 0.4),
        ] {
            let xs: Vec<f64> = (0..n).map(|_| family.sample_sum(mean, m, &mut rng)).collect();
            let avg = xs.iter().sum::<f64>() / n as f64;
            let sd_sum = (m as f64 * var).sqrt();
            assert!(
                (avg - m as f64 * mean).abs() < 5.0 * sd_sum / (n as f64).sqrt(),
                "{family}: {avg}"
            );
        }
    }

    #[test]
    fn family_round_trips() {
        for f in [
            NoiseFamily::Bernoulli,
            NoiseFamily::Gaussian { sd: 0.5 },
            NoiseFamily::Exponential,
            NoiseFamily::Poisson,
        ] {
            assert_eq!(f.to_string().parse::<NoiseFamily>().unwrap(), f);
        }
        assert!("gauss:-1".parse::<NoiseFamily>().is_err());
    }
}
