use rand::Rng;

use super::ItemStats;
use crate::envs::{Action, Feedback};
use crate::error::Result;
use crate::mbe::{select_argmax, Score};
use crate::policy::{FeedbackRouter, Policy, SlateShape};
use crate::rng::RngStream;

/// Decaying exploration rate `ε_t = min(1, a / (2√t))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EGSchedule {
    pub a: f64,
}

impl EGSchedule {
    pub fn new(a: f64) -> Self {
        assert!(a > 0.0, "exploration scale must be positive");
        Self { a }
    }

    pub fn epsilon(&self, t: usize) -> f64 {
        assert!(t >= 1, "rounds start at 1");
        (self.a / (2.0 * (t as f64).sqrt())).min(1.0)
    }
}

/// Whether round `t` explores.
pub fn eg_explores<R: Rng + ?Sized>(schedule: &EGSchedule, t: usize, rng: &mut R) -> bool {
    rng.random::<f64>() < schedule.epsilon(t)
}

/// A uniformly random arm with probability `ε_t`, otherwise the best
/// greedy score.
pub fn eg_select<R: Rng + ?Sized>(
    schedule: &EGSchedule,
    greedy_scores: &[Score],
    t: usize,
    rng: &mut R,
) -> usize {
    if eg_explores(schedule, t, rng) {
        rng.random_range(0..greedy_scores.len())
    } else {
        select_argmax(greedy_scores, rng)
    }
}

/// ε-greedy on empirical means, for arms or slates.
#[derive(Clone, Debug)]
pub struct EpsilonGreedyPolicy {
    schedule: EGSchedule,
    stats: ItemStats,
    shape: Option<SlateShape>,
    router: FeedbackRouter,
    scratch: Vec<Score>,
}

impl EpsilonGreedyPolicy {
    pub fn new(items: usize, a: f64, shape: Option<SlateShape>) -> Self {
        Self {
            schedule: EGSchedule::new(a),
            stats: ItemStats::new(items),
            shape,
            router: FeedbackRouter::new(),
            scratch: Vec::with_capacity(items),
        }
    }

    pub fn stats(&self) -> &ItemStats {
        &self.stats
    }

    fn greedy_scores(&mut self) {
        self.scratch.clear();
        for k in 0..self.stats.len() {
            self.scratch
                .push(self.stats.mean(k).map_or(Score::UNSEEN, Score::new));
        }
    }
}

impl Policy for EpsilonGreedyPolicy {
    fn select(&mut self, t: usize, rng: &mut RngStream) -> Action {
        if let Some(offer) = self.router.frozen_offer() {
            return Action::Slate(offer.to_vec());
        }
        self.greedy_scores();
        match &self.shape {
            None => Action::Arm(eg_select(&self.schedule, &self.scratch, t, rng)),
            Some(shape) => {
                if eg_explores(&self.schedule, t, rng) {
                    Action::Slate(shape.random_slate(self.stats.len(), rng))
                } else {
                    Action::Slate(shape.assemble(&self.scratch, rng))
                }
            }
        }
    }

    fn update(&mut self, action: &Action, feedback: &Feedback, _rng: &mut RngStream) -> Result<()> {
        for (item, obs) in self.router.route(action, feedback) {
            self.stats.record(item, obs);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_values() {
        assert_eq!(EGSchedule::new(5.0).epsilon(1), 1.0);
        assert!((EGSchedule::new(0.5).epsilon(10_000) - 0.0025).abs() < 1e-15);
    }

    #[test]
    fn vanishing_scale_is_greedy() {
        let s = EGSchedule::new(1e-12);
        let scores = [Score::new(0.2), Score::new(0.7), Score::new(0.1)];
        let mut rng = RngStream::new(5);
        assert!((1..2000).all(|t| eg_select(&s, &scores, t, &mut rng) == 1));
    }

    #[test]
    fn exploration_frequency_matches_schedule() {
        let s = EGSchedule::new(0.5);
        let mut rng = RngStream::new(6);
        let horizon = 50_000;
        let explored = (1..=horizon).filter(|&t| eg_explores(&s, t, &mut rng)).count() as f64;
        let expected: f64 = (1..=horizon).map(|t| s.epsilon(t)).sum();
        let var: f64 = (1..=horizon).map(|t| s.epsilon(t) * (1.0 - s.epsilon(t))).sum();
        assert!((explored - expected).abs() <= 3.0 * var.sqrt());
    }

    #[test]
    fn slate_exploration_is_feasible() {
        let shape = SlateShape::SemiBandit { slate: 4, items: 10 };
        let mut p = EpsilonGreedyPolicy::new(10, 100.0, Some(shape));
        let mut rng = RngStream::new(7);
        for t in 1..50 {
            let a = p.select(t, &mut rng);
            let sl = a.slate();
            assert_eq!(sl.iter().filter(|&&i| i < 5).count(), 2);
            assert_eq!(sl.iter().filter(|&&i| i >= 5).count(), 2);
        }
    }
}
