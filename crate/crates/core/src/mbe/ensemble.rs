//! Ensemble approximation: `B` replicates, each holding per-item weighted
//! sums that are extended by one fresh weight triplet per new observation.

use rand::Rng;

use super::{select_argmax, Score};
use crate::envs::{Action, Feedback};
use crate::error::Result;
use crate::policy::Policy;
use crate::rng::RngStream;
use crate::weights::{TuningParams, WeightTriplet};

/// Per-replicate, per-item accumulators
/// `num = Σ(ωR + λω′·1 + λω″·0)` and `den = Σ(ω + λω′ + λω″)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleState {
    replicates: usize,
    items: usize,
    num: Vec<f64>,
    den: Vec<f64>,
    counts: Vec<u64>,
}

impl EnsembleState {
    pub fn new(replicates: usize, items: usize) -> Self {
        assert!(replicates >= 1, "ensemble needs at least one replicate");
        Self {
            replicates,
            items,
            num: vec![0.0; replicates * items],
            den: vec![0.0; replicates * items],
            counts: vec![0; items],
        }
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn count(&self, item: usize) -> u64 {
        self.counts[item]
    }

    pub fn num(&self, replicate: usize, item: usize) -> f64 {
        self.num[replicate * self.items + item]
    }

    pub fn den(&self, replicate: usize, item: usize) -> f64 {
        self.den[replicate * self.items + item]
    }

    /// Adds one observation of `item` to every replicate, drawing a fresh
    /// triplet per replicate.
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        item: usize,
        observation: f64,
        params: &TuningParams,
        rng: &mut R,
    ) {
        self.counts[item] += 1;
        let lambda = params.lambda;
        for b in 0..self.replicates {
            let w = params.dist.sample_triplet(rng);
            self.accumulate(b, item, observation, lambda, w);
        }
    }

    /// As [`update`](Self::update) with caller-chosen triplets, one per
    /// replicate.
    pub fn update_with_weights(
        &mut self,
        item: usize,
        observation: f64,
        lambda: f64,
        weights: &[WeightTriplet],
    ) {
        assert_eq!(weights.len(), self.replicates);
        self.counts[item] += 1;
        for (b, &w) in weights.iter().enumerate() {
            self.accumulate(b, item, observation, lambda, w);
        }
    }

    fn accumulate(&mut self, b: usize, item: usize, obs: f64, lambda: f64, w: WeightTriplet) {
        let idx = b * self.items + item;
        self.num[idx] += w.omega * obs + lambda * w.omega_prime;
        self.den[idx] += w.omega + lambda * w.omega_prime + lambda * w.omega_dprime;
    }

    pub fn score(&self, replicate: usize, item: usize) -> Score {
        if self.counts[item] == 0 {
            return Score::UNSEEN;
        }
        let idx = replicate * self.items + item;
        Score::ratio(self.num[idx], self.den[idx])
    }

    pub fn scores_into(&self, replicate: usize, out: &mut Vec<Score>) {
        out.clear();
        out.extend((0..self.items).map(|i| self.score(replicate, i)));
    }

    pub fn sample_replicate<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(0..self.replicates)
    }

    /// Draws a replicate uniformly and returns it with its greedy item.
    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut Vec<Score>) -> (usize, usize) {
        let b = self.sample_replicate(rng);
        self.scores_into(b, scratch);
        (b, select_argmax(scratch, rng))
    }
}

/// MBE for multi-armed bandits via the ensemble approximation.
#[derive(Clone, Debug)]
pub struct EnsembleMabPolicy {
    state: EnsembleState,
    params: TuningParams,
    scratch: Vec<Score>,
}

impl EnsembleMabPolicy {
    pub fn new(arms: usize, replicates: usize, params: TuningParams) -> Self {
        Self {
            state: EnsembleState::new(replicates, arms),
            params,
            scratch: Vec::with_capacity(arms),
        }
    }

    pub fn state(&self) -> &EnsembleState {
        &self.state
    }
}

impl Policy for EnsembleMabPolicy {
    fn select(&mut self, _t: usize, rng: &mut RngStream) -> Action {
        let (_, arm) = self.state.select(rng, &mut self.scratch);
        Action::Arm(arm)
    }

    fn update(&mut self, action: &Action, feedback: &Feedback, rng: &mut RngStream) -> Result<()> {
        let Feedback::Reward(r) = feedback else {
            panic!("multi-armed policy got {feedback:?}");
        };
        self.state.update(action.arm(), *r, &self.params, rng);
        Ok(())
    }
}
