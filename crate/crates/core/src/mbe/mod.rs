//! Multiplier bootstrap exploration.
//!
//! Every variant scores an action by a weighted estimate in which each
//! observation carries a random multiplier weight `ω` and, unless
//! `lambda = 0`, is joined by two pseudo-observations with values 1 and 0
//! weighted `λω′` and `λω″`. For a mean this is
//!
//! ```text
//! Ȳ = Σ (ω R + λω′·1 + λω″·0) / Σ (ω + λω′ + λω″)
//! ```
//!
//! which concentrates at `(μ + λ)/(1 + 2λ)`, an increasing map of `μ`.
//!
//! * [`mab`]: full-resample scores for multi-armed bandits, plus the naive
//!   variant with no pseudo-rewards.
//! * [`ensemble`]: `B` incrementally updated replicates; one is drawn per
//!   round and acted on greedily.
//! * [`linear`]: weighted ridge regression replicates kept current with
//!   Sherman–Morrison updates.
//! * [`structured`]: per-item weighted estimates driving cascade,
//!   semi-bandit and MNL slate choices.

pub mod ensemble;
pub mod linear;
pub mod mab;
pub mod structured;

use rand::Rng;

pub use ensemble::{EnsembleMabPolicy, EnsembleState};
pub use linear::{lb_batch_solve, LinearMbePolicy, LinearReplicate, PseudoTerm};
pub use mab::{
    mbe_arm_score, mbe_mab_scores, naive_arm_score, naive_mb_scores, weighted_ratio, ArmHistory,
    ExactMabPolicy,
};
pub use structured::StructuredMbePolicy;

/// A randomized estimate. Undefined scores (zero weight mass) rank below
/// every defined score; `+∞` marks an action that has never been tried.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Score {
    pub value: f64,
    pub defined: bool,
}

impl Score {
    pub const UNDEFINED: Score = Score {
        value: f64::NAN,
        defined: false,
    };
    pub const UNSEEN: Score = Score {
        value: f64::INFINITY,
        defined: true,
    };

    pub fn new(value: f64) -> Self {
        Score {
            value,
            defined: true,
        }
    }

    /// `num / den`, undefined when `den == 0`. Negative denominators are
    /// kept as is.
    pub fn ratio(num: f64, den: f64) -> Self {
        if den == 0.0 {
            Score::UNDEFINED
        } else {
            Score::new(num / den)
        }
    }

    /// Total-order key: undefined maps below every real number.
    pub fn key(&self) -> f64 {
        if self.defined {
            self.value
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn is_unseen(&self) -> bool {
        self.defined && self.value == f64::INFINITY
    }
}

/// Argmax with uniform random tie-breaking. When every score is undefined
/// the choice is uniform over all indices.
pub fn select_argmax<R: Rng + ?Sized>(scores: &[Score], rng: &mut R) -> usize {
    assert!(!scores.is_empty(), "argmax over no scores");
    let mut best = f64::NEG_INFINITY;
    let mut chosen = None;
    let mut ties = 0u32;
    for (i, s) in scores.iter().enumerate() {
        if !s.defined {
            continue;
        }
        if chosen.is_none() || s.value > best {
            best = s.value;
            chosen = Some(i);
            ties = 1;
        } else if s.value == best {
            // Reservoir sampling over the tied maximizers.
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                chosen = Some(i);
            }
        }
    }
    match chosen {
        Some(i) => i,
        None => {
            log::debug!("all {} scores undefined; choosing uniformly", scores.len());
            rng.random_range(0..scores.len())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn tie_break_is_uniform() {
        let scores = [Score::new(0.1), Score::new(0.9), Score::new(0.9)];
        let mut rng = RngStream::new(1);
        let n = 10_000;
        let second = (0..n).filter(|_| select_argmax(&scores, &mut rng) == 1).count();
        let freq = second as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.015, "freq {freq}");
    }

    #[test]
    fn unseen_wins_and_undefined_loses() {
        let mut rng = RngStream::new(2);
        let scores = [Score::new(5.0), Score::UNSEEN, Score::UNDEFINED];
        assert!((0..100).all(|_| select_argmax(&scores, &mut rng) == 1));
        let scores = [Score::UNDEFINED, Score::new(-3.0), Score::UNDEFINED];
        assert!((0..100).all(|_| select_argmax(&scores, &mut rng) == 1));
    }

    #[test]
    fn all_undefined_is_uniform() {
        let mut rng = RngStream::new(3);
        let scores = [Score::UNDEFINED; 4];
        let mut hits = [0usize; 4];
        for _ in 0..4000 {
            hits[select_argmax(&scores, &mut rng)] += 1;
        }
        assert!(hits.iter().all(|&h| h > 800), "{hits:?}");
    }

    proptest::proptest! {
        #[test]
        fn argmax_invariant_under_positive_affine_maps(
            values in proptest::collection::vec(-10.0f64..10.0, 1..20),
            a in 0.01f64..100.0,
            b in -50.0f64..50.0,
            seed: u64,
        ) {
            let raw: Vec<Score> = values.iter().map(|&v| Score::new(v)).collect();
            let mapped: Vec<Score> = values.iter().map(|&v| Score::new(a * v + b)).collect();
            let pick = select_argmax(&raw, &mut RngStream::new(seed));
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            proptest::prop_assert_eq!(values[pick], max);
            let pick = select_argmax(&mapped, &mut RngStream::new(seed));
            proptest::prop_assert_eq!(values[pick], max);
        }
    }
}
