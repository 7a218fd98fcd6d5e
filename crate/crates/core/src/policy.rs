//! The policy interface and the pieces shared by slate policies.

use rand::Rng;

use crate::envs::{parametric_assortment, Action, Environment, Feedback};
use crate::error::Result;
use crate::mbe::Score;
use crate::rng::RngStream;

/// A bandit algorithm's mutable state for one run.
///
/// Rounds are numbered from 1. A policy is owned by a single run; it may
/// move between threads but is never shared.
pub trait Policy: Send {
    fn select(&mut self, t: usize, rng: &mut RngStream) -> Action;

    fn update(&mut self, action: &Action, feedback: &Feedback, rng: &mut RngStream) -> Result<()>;
}

/// How per-item scores become a feasible slate.
#[derive(Clone, Debug, PartialEq)]
pub enum SlateShape {
    /// Top `slate` items, ranked by score.
    Cascade { slate: usize },
    /// Top `slate / 2` items of each half of the catalogue.
    SemiBandit { slate: usize, items: usize },
    /// Best assortment under the scores read as MNL attractiveness.
    Mnl { slate: usize, revenues: Vec<f64> },
}

impl SlateShape {
    pub fn for_env(env: &Environment) -> Option<Self> {
        match env {
            Environment::Cascade(e) => Some(SlateShape::Cascade {
                slate: e.slate_size(),
            }),
            Environment::SemiBandit(e) => Some(SlateShape::SemiBandit {
                slate: e.slate_size(),
                items: e.n_items(),
            }),
            Environment::Mnl(e) => Some(SlateShape::Mnl {
                slate: e.slate_size(),
                revenues: e.revenues().to_vec(),
            }),
            _ => None,
        }
    }

    pub fn assemble<R: Rng + ?Sized>(&self, scores: &[Score], rng: &mut R) -> Vec<usize> {
        match self {
            SlateShape::Cascade { slate } => rank_items(scores, 0..scores.len(), *slate, rng),
            SlateShape::SemiBandit { slate, items } => {
                let half = items / 2;
                let mut out = rank_items(scores, 0..half, slate / 2, rng);
                out.extend(rank_items(scores, half..*items, slate / 2, rng));
                out
            }
            SlateShape::Mnl { slate, revenues } => {
                if scores.iter().any(Score::is_unseen) {
                    return rank_items(scores, 0..scores.len(), *slate, rng);
                }
                let v: Vec<f64> = scores
                    .iter()
                    .map(|s| if s.defined { s.value.max(0.0) } else { 0.0 })
                    .collect();
                parametric_assortment(&v, revenues, *slate)
            }
        }
    }
}

impl SlateShape {
    /// A uniformly random feasible slate over `items` items.
    pub fn random_slate<R: Rng + ?Sized>(&self, items: usize, rng: &mut R) -> Vec<usize> {
        let pick = |range: std::ops::Range<usize>, k: usize, rng: &mut R| -> Vec<usize> {
            let start = range.start;
            rand::seq::index::sample(rng, range.len(), k)
                .into_iter()
                .map(|i| i + start)
                .collect()
        };
        match self {
            SlateShape::Cascade { slate } | SlateShape::Mnl { slate, .. } => pick(0..items, *slate, rng),
            SlateShape::SemiBandit { slate, items } => {
                let half = items / 2;
                let mut out = pick(0..half, slate / 2, rng);
                out.extend(pick(half..*items, slate / 2, rng));
                out
            }
        }
    }
}

/// The `k` best items of `range` by score, best first, with uniformly
/// random order among equal scores.
pub fn rank_items<R: Rng + ?Sized>(
    scores: &[Score],
    range: std::ops::Range<usize>,
    k: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut keyed: Vec<(f64, u64, usize)> = range
        .map(|i| (scores[i].key(), rng.random::<u64>(), i))
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.truncate(k);
    keyed.into_iter().map(|(_, _, i)| i).collect()
}

/// Turns slate feedback into per-item scalar observations.
///
/// * cascade: a 0/1 outcome for every examined position, up to and
///   including the click;
/// * semi-bandit: each chosen item's reward;
/// * MNL: an epoch offers a fixed assortment until a no-purchase; when it
///   ends, every offered item yields the number of times it was bought.
#[derive(Clone, Debug, Default)]
pub struct FeedbackRouter {
    epoch: Option<Epoch>,
}

#[derive(Clone, Debug)]
struct Epoch {
    offered: Vec<usize>,
    purchases: Vec<u32>,
}

impl FeedbackRouter {
    pub fn new() -> Self {
        Self::default()
    }

    /// The assortment frozen by an ongoing MNL epoch.
    pub fn frozen_offer(&self) -> Option<&[usize]> {
        self.epoch.as_ref().map(|e| e.offered.as_slice())
    }

    /// Observations that became available with this feedback.
    pub fn route(&mut self, action: &Action, feedback: &Feedback) -> Vec<(usize, f64)> {
        match feedback {
            Feedback::Cascade(outcome) => {
                let slate = action.slate();
                let seen = outcome.examined(slate.len());
                slate[..seen]
                    .iter()
                    .enumerate()
                    .map(|(pos, &item)| (item, if outcome.click == Some(pos) { 1.0 } else { 0.0 }))
                    .collect()
            }
            Feedback::SemiBandit(rewards) => {
                action.slate().iter().copied().zip(rewards.iter().copied()).collect()
            }
            Feedback::Choice(choice) => {
                let epoch = self.epoch.get_or_insert_with(|| Epoch {
                    offered: action.slate().to_vec(),
                    purchases: vec![0; action.slate().len()],
                });
                debug_assert_eq!(epoch.offered, action.slate());
                match choice {
                    Some(item) => {
                        let pos = epoch
                            .offered
                            .iter()
                            .position(|o| o == item)
                            .expect("purchased item was offered");
                        epoch.purchases[pos] += 1;
                        Vec::new()
                    }
                    None => {
                        let done = self.epoch.take().expect("epoch is open");
                        done.offered
                            .into_iter()
                            .zip(done.purchases)
                            .map(|(i, c)| (i, f64::from(c)))
                            .collect()
                    }
                }
            }
            Feedback::Reward(r) => vec![(action.arm(), *r)],
        }
    }
}

/// Always plays the optimal action. Regret is identically zero.
#[derive(Clone, Debug)]
pub struct OraclePolicy {
    action: Action,
}

impl OraclePolicy {
    pub fn new(env: &Environment) -> Self {
        Self {
            action: env.optimal_action(),
        }
    }
}

impl Policy for OraclePolicy {
    fn select(&mut self, _t: usize, _rng: &mut RngStream) -> Action {
        self.action.clone()
    }

    fn update(&mut self, _: &Action, _: &Feedback, _: &mut RngStream) -> Result<()> {
        Ok(())
    }
}

/// Uniformly random feasible action every round.
#[derive(Clone, Debug)]
pub struct UniformPolicy {
    env: Environment,
}

impl UniformPolicy {
    pub fn new(env: &Environment) -> Self {
        Self { env: env.clone() }
    }
}

impl Policy for UniformPolicy {
    fn select(&mut self, _t: usize, rng: &mut RngStream) -> Action {
        self.env.random_action(rng)
    }

    fn update(&mut self, _: &Action, _: &Feedback, _: &mut RngStream) -> Result<()> {
        Ok(())
    }
}
