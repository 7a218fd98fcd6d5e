//! Synthetic stochastic bandit environments.
//!
//! Environments are immutable after construction; every pull takes the
//! caller's random stream, so one instance can serve concurrent runs.

mod cascade;
mod linear;
mod mab;
mod mnl;
mod semi;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

pub use cascade::{CascadeEnv, CascadeOutcome};
pub use linear::{LinEnv, LOW_RANK};
pub use mab::{MabEnv, RewardFamily};
pub use mnl::{assortment_revenue, exhaustive_assortment, parametric_assortment, MnlEnv};
pub use semi::SemiBanditEnv;

use crate::error::{Error, Result};
use crate::grammar::{join_list, SpecTokens};

/// What the agent offers in one round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    /// An arm index (multi-armed and linear bandits).
    Arm(usize),
    /// An ordered list of items (cascade rank order; a set for the others).
    Slate(Vec<usize>),
}

impl Action {
    pub fn arm(&self) -> usize {
        match self {
            Action::Arm(k) => *k,
            Action::Slate(_) => panic!("expected an arm, got a slate"),
        }
    }

    pub fn slate(&self) -> &[usize] {
        match self {
            Action::Slate(s) => s,
            Action::Arm(_) => panic!("expected a slate, got an arm"),
        }
    }
}

/// What the environment reveals after an action.
#[derive(Clone, Debug, PartialEq)]
pub enum Feedback {
    Reward(f64),
    Cascade(CascadeOutcome),
    /// One reward per slate position.
    SemiBandit(Vec<f64>),
    /// Purchased item, or `None` for no purchase.
    Choice(Option<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvKind {
    Mab,
    Linear,
    Cascade,
    SemiBandit,
    Mnl,
}

impl EnvKind {
    pub fn is_structured(self) -> bool {
        matches!(self, EnvKind::Cascade | EnvKind::SemiBandit | EnvKind::Mnl)
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvKind::Mab => "mab",
            EnvKind::Linear => "lin",
            EnvKind::Cascade => "cascade",
            EnvKind::SemiBandit => "semi",
            EnvKind::Mnl => "mnl",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Environment {
    Mab(MabEnv),
    Linear(LinEnv),
    Cascade(CascadeEnv),
    SemiBandit(SemiBanditEnv),
    Mnl(MnlEnv),
}

impl Environment {
    pub fn kind(&self) -> EnvKind {
        match self {
            Environment::Mab(_) => EnvKind::Mab,
            Environment::Linear(_) => EnvKind::Linear,
            Environment::Cascade(_) => EnvKind::Cascade,
            Environment::SemiBandit(_) => EnvKind::SemiBandit,
            Environment::Mnl(_) => EnvKind::Mnl,
        }
    }

    /// Number of arms, or of items for slate problems.
    pub fn n_items(&self) -> usize {
        match self {
            Environment::Mab(e) => e.n_arms(),
            Environment::Linear(e) => e.n_arms(),
            Environment::Cascade(e) => e.n_items(),
            Environment::SemiBandit(e) => e.n_items(),
            Environment::Mnl(e) => e.n_items(),
        }
    }

    /// Panics when the action is not feasible for this environment.
    pub fn pull<R: Rng + ?Sized>(&self, action: &Action, rng: &mut R) -> Feedback {
        match self {
            Environment::Mab(e) => Feedback::Reward(e.pull(checked_arm(action, e.n_arms()), rng)),
            Environment::Linear(e) => {
                Feedback::Reward(e.pull(checked_arm(action, e.n_arms()), rng))
            }
            Environment::Cascade(e) => Feedback::Cascade(e.pull(action.slate(), rng)),
            Environment::SemiBandit(e) => Feedback::SemiBandit(e.pull(action.slate(), rng)),
            Environment::Mnl(e) => Feedback::Choice(e.pull(action.slate(), rng)),
        }
    }

    /// Expected reward of an action under the hidden parameters.
    pub fn expected_value(&self, action: &Action) -> f64 {
        match self {
            Environment::Mab(e) => e.means()[checked_arm(action, e.n_arms())],
            Environment::Linear(e) => e.means()[checked_arm(action, e.n_arms())],
            Environment::Cascade(e) => {
                e.check_slate(action.slate());
                e.expected_value(action.slate())
            }
            Environment::SemiBandit(e) => {
                e.check_slate(action.slate());
                e.expected_value(action.slate())
            }
            Environment::Mnl(e) => {
                e.check_slate(action.slate());
                e.expected_value(action.slate())
            }
        }
    }

    pub fn optimal_action(&self) -> Action {
        match self {
            Environment::Mab(e) => Action::Arm(e.best_arm()),
            Environment::Linear(e) => Action::Arm(e.best_arm()),
            Environment::Cascade(e) => Action::Slate(e.optimal_slate()),
            Environment::SemiBandit(e) => Action::Slate(e.optimal_slate()),
            Environment::Mnl(e) => Action::Slate(e.optimal_slate()),
        }
    }

    pub fn optimal_value(&self) -> f64 {
        match self {
            Environment::Mab(e) => e.optimal_value(),
            Environment::Linear(e) => e.optimal_value(),
            Environment::Cascade(e) => e.optimal_value(),
            Environment::SemiBandit(e) => e.optimal_value(),
            Environment::Mnl(e) => e.optimal_value(),
        }
    }

    /// Uniformly random feasible action.
    pub fn random_action<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        match self {
            Environment::Mab(_) | Environment::Linear(_) => {
                Action::Arm(rng.random_range(0..self.n_items()))
            }
            Environment::Cascade(e) => {
                Action::Slate(random_subset(0..e.n_items(), e.slate_size(), rng))
            }
            Environment::SemiBandit(e) => {
                let [a, b] = e.groups();
                let mut s = random_subset(a, e.slate_size() / 2, rng);
                s.extend(random_subset(b, e.slate_size() / 2, rng));
                Action::Slate(s)
            }
            Environment::Mnl(e) => {
                Action::Slate(random_subset(0..e.n_items(), e.slate_size(), rng))
            }
        }
    }
}

fn checked_arm(action: &Action, n: usize) -> usize {
    let k = action.arm();
    assert!(k < n, "arm {k} out of range for {n} arms");
    k
}

pub(crate) fn assert_distinct(items: &[usize], n: usize) {
    for (i, &a) in items.iter().enumerate() {
        assert!(a < n, "item {a} out of range for {n} items");
        assert!(!items[..i].contains(&a), "item {a} repeated");
    }
}

/// Indices of the `k` largest values, largest first, ties to lower index.
pub(crate) fn top_k_by(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

fn random_subset<R: Rng + ?Sized>(
    range: std::ops::Range<usize>,
    k: usize,
    rng: &mut R,
) -> Vec<usize> {
    let items: Vec<usize> = range.collect();
    rand::seq::index::sample(rng, items.len(), k)
        .into_iter()
        .map(|i| items[i])
        .collect()
}

/// Default upper bound of the uniform draw for structured-problem
/// attractions and item means.
pub const DEFAULT_MAX_ATTRACTION: f64 = 0.3;
/// Default per-item reward noise for the semi-bandit.
pub const DEFAULT_SEMI_NOISE_SD: f64 = 0.1;

/// An environment family plus the recipe for drawing instances of it.
///
/// Grammar: `mab:bernoulli:K=10:alpha=1`, `mab:gauss:K=10:sd=1`,
/// `mab:exp:K=10`, `mab:bernoulli:means=0.8,0.5` (fixed instance),
/// `lin:p=10:K=100`, `cascade:L=30:K=4`, `semi:L=30:K=4`, `mnl:L=30:K=4`.
/// Structured specs accept `max=` (uniform draw bound); `semi` also `sd=`.
#[derive(Clone, Debug, PartialEq)]
pub enum EnvSpec {
    Mab {
        family: RewardFamily,
        arms: usize,
        alpha: f64,
        fixed_means: Option<Vec<f64>>,
    },
    Linear {
        dim: usize,
        arms: usize,
    },
    Cascade {
        items: usize,
        slate: usize,
        max_attraction: f64,
    },
    SemiBandit {
        items: usize,
        slate: usize,
        max_mean: f64,
        noise_sd: f64,
    },
    Mnl {
        items: usize,
        slate: usize,
        max_attractiveness: f64,
    },
}

impl EnvSpec {
    pub fn kind(&self) -> EnvKind {
        match self {
            EnvSpec::Mab { .. } => EnvKind::Mab,
            EnvSpec::Linear { .. } => EnvKind::Linear,
            EnvSpec::Cascade { .. } => EnvKind::Cascade,
            EnvSpec::SemiBandit { .. } => EnvKind::SemiBandit,
            EnvSpec::Mnl { .. } => EnvKind::Mnl,
        }
    }

    pub fn mab_family(&self) -> Option<RewardFamily> {
        match self {
            EnvSpec::Mab { family, .. } => Some(*family),
            _ => None,
        }
    }

    /// Draws one instance.
    pub fn instantiate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Environment> {
        Ok(match self {
            EnvSpec::Mab {
                family,
                fixed_means: Some(means),
                ..
            } => Environment::Mab(MabEnv::new(means.clone(), *family)?),
            EnvSpec::Mab {
                family,
                arms,
                alpha,
                fixed_means: None,
            } => Environment::Mab(MabEnv::sample(*arms, *alpha, *family, rng)?),
            EnvSpec::Linear { dim, arms } => Environment::Linear(LinEnv::sample(*dim, *arms, rng)?),
            EnvSpec::Cascade {
                items,
                slate,
                max_attraction,
            } => Environment::Cascade(CascadeEnv::sample(*items, *slate, *max_attraction, rng)?),
            EnvSpec::SemiBandit {
                items,
                slate,
                max_mean,
                noise_sd,
            } => Environment::SemiBandit(SemiBanditEnv::sample(
                *items, *slate, *max_mean, *noise_sd, rng,
            )?),
            EnvSpec::Mnl {
                items,
                slate,
                max_attractiveness,
            } => Environment::Mnl(MnlEnv::sample(*items, *slate, *max_attractiveness, rng)?),
        })
    }

    fn validate(&self) -> Result<()> {
        match self {
            EnvSpec::Mab {
                arms,
                alpha,
                fixed_means,
                ..
            } => {
                if let Some(m) = fixed_means {
                    if m.len() < 2 {
                        return Err(Error::config("fixed means need at least 2 arms"));
                    }
                } else if *arms < 2 {
                    return Err(Error::config(format!("need K >= 2, got {arms}")));
                }
                if !(*alpha > 0.0) {
                    return Err(Error::config(format!("alpha must be positive, got {alpha}")));
                }
            }
            EnvSpec::Linear { dim, arms } => {
                if *dim < LOW_RANK || arms < dim {
                    return Err(Error::config(format!(
                        "linear spec needs p >= {LOW_RANK} and K >= p, got p={dim}, K={arms}"
                    )));
                }
            }
            EnvSpec::Cascade { items, slate, .. } | EnvSpec::Mnl { items, slate, .. } => {
                if *slate == 0 || slate > items {
                    return Err(Error::config(format!("need 1 <= K <= L, got K={slate}, L={items}")));
                }
            }
            EnvSpec::SemiBandit { items, slate, .. } => {
                if items % 2 != 0 || slate % 2 != 0 || *slate == 0 || slate > items {
                    return Err(Error::config(format!(
                        "semi-bandit needs even L and even K <= L, got K={slate}, L={items}"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl FromStr for EnvSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut t = SpecTokens::parse(s)?;
        let spec = match t.head() {
            "mab" => {
                let family = match t.positional().get(1).copied() {
                    Some("bernoulli") => RewardFamily::Bernoulli,
                    Some("gauss") => RewardFamily::Gaussian {
                        noise_sd: t.take("sd")?.unwrap_or(1.0),
                    },
                    Some("exp") => RewardFamily::Exponential,
                    other => {
                        return Err(Error::config(format!(
                            "unknown reward family {other:?} in '{s}'"
                        )))
                    }
                };
                let fixed_means = t.take_list("means")?;
                let arms = match &fixed_means {
                    Some(m) => {
                        let k = t.take::<usize>("K")?.unwrap_or(m.len());
                        if k != m.len() {
                            return Err(Error::config("K disagrees with the number of means"));
                        }
                        k
                    }
                    None => t.take("K")?.unwrap_or(10),
                };
                EnvSpec::Mab {
                    family,
                    arms,
                    alpha: t.take("alpha")?.unwrap_or(1.0),
                    fixed_means,
                }
            }
            "lin" => EnvSpec::Linear {
                dim: t.take("p")?.unwrap_or(10),
                arms: t.take("K")?.unwrap_or(100),
            },
            "cascade" => EnvSpec::Cascade {
                items: t.take("L")?.unwrap_or(30),
                slate: t.take("K")?.unwrap_or(4),
                max_attraction: t.take("max")?.unwrap_or(DEFAULT_MAX_ATTRACTION),
            },
            "semi" => EnvSpec::SemiBandit {
                items: t.take("L")?.unwrap_or(30),
                slate: t.take("K")?.unwrap_or(4),
                max_mean: t.take("max")?.unwrap_or(DEFAULT_MAX_ATTRACTION),
                noise_sd: t.take("sd")?.unwrap_or(DEFAULT_SEMI_NOISE_SD),
            },
            "mnl" => EnvSpec::Mnl {
                items: t.take("L")?.unwrap_or(30),
                slate: t.take("K")?.unwrap_or(4),
                max_attractiveness: t.take("max")?.unwrap_or(DEFAULT_MAX_ATTRACTION),
            },
            other => return Err(Error::config(format!("unknown environment '{other}'"))),
        };
        let max_positional = if spec.kind() == EnvKind::Mab { 2 } else { 1 };
        if t.positional().len() > max_positional {
            return Err(Error::config(format!("unexpected field in environment spec '{s}'")));
        }
        t.finish()?;
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for EnvSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvSpec::Mab {
                family,
                arms,
                alpha,
                fixed_means,
            } => {
                match family {
                    RewardFamily::Bernoulli => f.write_str("mab:bernoulli")?,
                    RewardFamily::Gaussian { noise_sd } => write!(f, "mab:gauss:sd={noise_sd}")?,
                    RewardFamily::Exponential => f.write_str("mab:exp")?,
                }
                match fixed_means {
                    Some(m) => write!(f, ":means={}", join_list(m)),
                    None => write!(f, ":K={arms}:alpha={alpha}"),
                }
            }
            EnvSpec::Linear { dim, arms } => write!(f, "lin:p={dim}:K={arms}"),
            EnvSpec::Cascade {
                items,
                slate,
                max_attraction,
            } => write!(f, "cascade:L={items}:K={slate}:max={max_attraction}"),
            EnvSpec::SemiBandit {
                items,
                slate,
                max_mean,
                noise_sd,
            } => write!(f, "semi:L={items}:K={slate}:max={max_mean}:sd={noise_sd}"),
            EnvSpec::Mnl {
                items,
                slate,
                max_attractiveness,
            } => write!(f, "mnl:L={items}:K={slate}:max={max_attractiveness}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn spec_grammar_examples_parse() {
        for s in [
            "mab:bernoulli:K=10:alpha=1",
            "mab:gauss:K=10:sd=1",
            "mab:exp:K=10",
            "lin:p=10:K=100",
            "cascade:L=30:K=4",
            "semi:L=30:K=4",
            "mnl:L=30:K=4",
            "mab:bernoulli:means=0.8,0.5",
        ] {
            let spec: EnvSpec = s.parse().unwrap_or_else(|e| panic!("{s}: {e}"));
            let again: EnvSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, again, "{s}");
        }
    }

    #[test]
    fn spec_errors() {
        for s in [
            "mab:bernoulli:K=1",
            "mab:poisson:K=3",
            "lin:p=4:K=100",
            "semi:L=30:K=3",
            "cascade:L=3:K=4",
            "mab:bernoulli:K=10:beta=2",
            "bogus",
        ] {
            assert!(s.parse::<EnvSpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn random_actions_are_feasible() {
        let mut rng = RngStream::new(1);
        for s in ["mab:bernoulli:K=5", "cascade:L=10:K=3", "semi:L=10:K=4", "mnl:L=10:K=4"] {
            let env = s.parse::<EnvSpec>().unwrap().instantiate(&mut rng).unwrap();
            for _ in 0..50 {
                let a = env.random_action(&mut rng);
                let v = env.expected_value(&a);
                assert!(v <= env.optimal_value() + 1e-12);
            }
        }
    }

    #[test]
    fn optimal_value_dominates_monte_carlo_values() {
        // Regret nonnegativity on random small instances: the oracle value
        // is at least the Monte-Carlo mean reward of random feasible actions.
        let mut rng = RngStream::new(2);
        for s in ["cascade:L=6:K=2", "semi:L=6:K=2", "mnl:L=6:K=3", "mab:gauss:K=4"] {
            let spec: EnvSpec = s.parse().unwrap();
            for _ in 0..5 {
                let env = spec.instantiate(&mut rng).unwrap();
                let opt = env.optimal_value();
                for _ in 0..5 {
                    let a = env.random_action(&mut rng);
                    let n = 4000;
                    let mut total = 0.0;
                    for _ in 0..n {
                        total += realized_reward(&env, &a, &env.pull(&a, &mut rng));
                    }
                    let mean = total / n as f64;
                    // 4 sigma of a reward bounded well inside [-1, 2].
                    assert!(mean <= opt + 4.0 * 1.5 / (n as f64).sqrt(), "{s}: {mean} > {opt}");
                }
            }
        }
    }

    fn realized_reward(env: &Environment, a: &Action, fb: &Feedback) -> f64 {
        match (env, fb) {
            (_, Feedback::Reward(r)) => *r,
            (_, Feedback::Cascade(o)) => f64::from(u8::from(o.click.is_some())),
            (_, Feedback::SemiBandit(rs)) => rs.iter().sum(),
            (Environment::Mnl(e), Feedback::Choice(c)) => c.map_or(0.0, |i| e.revenues()[i]),
            _ => unreachable!("{a:?}"),
        }
    }
}
