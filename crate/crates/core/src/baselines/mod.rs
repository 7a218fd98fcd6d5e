//! Comparison policies: Thompson sampling, perturbed-history exploration
//! and ε-greedy.

pub mod egreedy;
pub mod phe;
pub mod ts;

pub use egreedy::{eg_explores, eg_select, EGSchedule, EpsilonGreedyPolicy};
pub use phe::{perturbed_mean, pseudo_count, NoiseFamily, PhePolicy, PheState, TUNING_GRID};
pub use ts::{BetaPosterior, GaussianPosterior, ThompsonPolicy};

/// Per-item running sums and counts.
#[derive(Clone, Debug, PartialEq)]
pub struct ItemStats {
    pub sums: Vec<f64>,
    pub counts: Vec<u64>,
}

impl ItemStats {
    pub fn new(items: usize) -> Self {
        Self {
            sums: vec![0.0; items],
            counts: vec![0; items],
        }
    }

    pub fn record(&mut self, item: usize, obs: f64) {
        self.sums[item] += obs;
        self.counts[item] += 1;
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    pub fn mean(&self, item: usize) -> Option<f64> {
        (self.counts[item] > 0).then(|| self.sums[item] / self.counts[item] as f64)
    }
}
