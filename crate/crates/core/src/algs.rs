//! Algorithm specs: parsing, printing, and building policies for an
//! environment instance.

use std::fmt;
use std::str::FromStr;

use crate::baselines::{
    BetaPosterior, EpsilonGreedyPolicy, GaussianPosterior, NoiseFamily, PhePolicy, ThompsonPolicy,
};
use crate::envs::{EnvKind, EnvSpec, Environment, RewardFamily};
use crate::error::{Error, Result};
use crate::grammar::{join_list, SpecTokens};
use crate::mbe::{
    EnsembleMabPolicy, ExactMabPolicy, LinearMbePolicy, PseudoTerm, StructuredMbePolicy,
};
use crate::policy::{OraclePolicy, Policy, SlateShape, UniformPolicy};
use crate::weights::{validate_tuning, TheoryStatus, TuningParams, WeightDistribution};

pub const DEFAULT_LAMBDA: f64 = 0.5;
pub const DEFAULT_REPLICATES: usize = 50;
pub const DEFAULT_TS_PRIOR: (f64, f64) = (0.5, 0.5);

/// Prior of Gaussian Thompson sampling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GaussPrior {
    /// Mean and standard deviation.
    Fixed(f64, f64),
    /// Mean and sd of the instance generator's arm-mean law. Only possible
    /// in simulation, where the generator is known.
    Calibrated,
}

/// One algorithm and its hyperparameters.
///
/// Grammar: `mbe:lambda=0.5:sigma=1:B=50:exact=false` (also `dist=`, `xi=`,
/// `lb_pseudo=identity|feature`), `naive-mb:dist=gauss:1` (`B=`,
/// `exact=`), `ts:bernoulli`, `ts:gauss:prior=0.5,0.5` (or
/// `prior=calibrated`; `sd=` noise), `phe:a=1` (`family=`), `eg:a=0.5`,
/// `oracle`, `uniform`.
#[derive(Clone, Debug, PartialEq)]
pub enum AlgSpec {
    Mbe {
        params: TuningParams,
        replicates: usize,
        exact: bool,
        ridge: f64,
        pseudo: PseudoTerm,
    },
    NaiveMb {
        dist: WeightDistribution,
        replicates: usize,
        exact: bool,
    },
    TsBernoulli,
    TsGaussian {
        prior: GaussPrior,
        noise_sd: Option<f64>,
    },
    Phe {
        a: f64,
        family: Option<NoiseFamily>,
    },
    EpsilonGreedy {
        a: f64,
    },
    Oracle,
    Uniform,
}

impl AlgSpec {
    /// Short name used as the `algorithm` column.
    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Whether this algorithm can run on environments of `kind`.
    pub fn check_compatible(&self, kind: EnvKind) -> Result<()> {
        let ok = match self {
            AlgSpec::Mbe { exact, .. } => !*exact || kind == EnvKind::Mab,
            AlgSpec::NaiveMb { .. } | AlgSpec::TsBernoulli | AlgSpec::TsGaussian { .. } => {
                kind == EnvKind::Mab
            }
            AlgSpec::Phe { .. } | AlgSpec::EpsilonGreedy { .. } => kind != EnvKind::Linear,
            AlgSpec::Oracle | AlgSpec::Uniform => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("algorithm '{self}' does not support {kind} environments")))
        }
    }

    /// A warning when MBE runs outside the range covered by the regret
    /// guarantee. Never an error.
    pub fn tuning_notice(&self) -> Option<String> {
        let AlgSpec::Mbe { params, .. } = self else {
            return None;
        };
        let WeightDistribution::GaussianUnitMean { sigma } = params.dist else {
            return None;
        };
        match validate_tuning(params.lambda, sigma) {
            Ok(TheoryStatus::PracticalOnly) => Some(format!(
                "'{self}': lambda={} is below the guaranteed range for sigma={sigma}; \
                 running as a practical setting",
                params.lambda
            )),
            _ => None,
        }
    }

    /// The same algorithm with its tuning parameter replaced, or `None` if
    /// it has none.
    pub fn with_tuning(&self, value: f64) -> Result<Option<AlgSpec>> {
        let out = match self {
            AlgSpec::Mbe {
                params,
                replicates,
                exact,
                ridge,
                pseudo,
            } => AlgSpec::Mbe {
                params: TuningParams::new(value, params.dist)?,
                replicates: *replicates,
                exact: *exact,
                ridge: *ridge,
                pseudo: *pseudo,
            },
            AlgSpec::Phe { family, .. } => AlgSpec::Phe {
                a: positive("a", value)?,
                family: *family,
            },
            AlgSpec::EpsilonGreedy { .. } => AlgSpec::EpsilonGreedy {
                a: positive("a", value)?,
            },
            _ => return Ok(None),
        };
        Ok(Some(out))
    }

    /// A fresh policy for one run on `env`, an instance of `env_spec`.
    pub fn build(&self, env: &Environment, env_spec: &EnvSpec) -> Result<Box<dyn Policy>> {
        self.check_compatible(env.kind())?;
        let items = env.n_items();
        let shape = SlateShape::for_env(env);
        Ok(match self {
            AlgSpec::Mbe {
                params,
                replicates,
                exact,
                ridge,
                pseudo,
            } => match env {
                Environment::Mab(_) if *exact => Box::new(ExactMabPolicy::new(items, *params)),
                Environment::Mab(_) => Box::new(EnsembleMabPolicy::new(items, *replicates, *params)),
                Environment::Linear(e) => Box::new(LinearMbePolicy::new(
                    e.features().to_vec(),
                    *replicates,
                    *ridge,
                    *params,
                    *pseudo,
                )),
                _ => Box::new(StructuredMbePolicy::new(
                    shape.expect("structured environment has a slate shape"),
                    items,
                    *replicates,
                    *params,
                )),
            },
            AlgSpec::NaiveMb {
                dist,
                replicates,
                exact,
            } => {
                if *exact {
                    Box::new(ExactMabPolicy::naive(items, *dist))
                } else {
                    let params = TuningParams::new(0.0, *dist)?;
                    Box::new(EnsembleMabPolicy::new(items, *replicates, params))
                }
            }
            AlgSpec::TsBernoulli => {
                Box::new(ThompsonPolicy::Bernoulli(BetaPosterior::new(items, 1.0, 1.0)))
            }
            AlgSpec::TsGaussian { prior, noise_sd } => {
                let (mean, sd) = match prior {
                    GaussPrior::Fixed(m, s) => (*m, *s),
                    GaussPrior::Calibrated => generator_moments(env_spec)?,
                };
                let noise = noise_sd.unwrap_or(match env_spec.mab_family() {
                    Some(RewardFamily::Gaussian { noise_sd }) => noise_sd,
                    _ => 1.0,
                });
                Box::new(ThompsonPolicy::Gaussian(GaussianPosterior::new(items, mean, sd, noise)))
            }
            AlgSpec::Phe { a, family } => {
                let family = family.unwrap_or_else(|| default_noise_family(env));
                Box::new(PhePolicy::new(items, *a, family, shape))
            }
            AlgSpec::EpsilonGreedy { a } => Box::new(EpsilonGreedyPolicy::new(items, *a, shape)),
            AlgSpec::Oracle => Box::new(OraclePolicy::new(env)),
            AlgSpec::Uniform => Box::new(UniformPolicy::new(env)),
        })
    }
}

/// Mean and sd of `Beta(α, 8)`, the law arm means are drawn from.
fn generator_moments(spec: &EnvSpec) -> Result<(f64, f64)> {
    match spec {
        EnvSpec::Mab {
            alpha,
            fixed_means: None,
            ..
        } => {
            let (a, b) = (*alpha, 8.0);
            let mean = a / (a + b);
            let var = a * b / ((a + b).powi(2) * (a + b + 1.0));
            Ok((mean, var.sqrt()))
        }
        _ => Err(Error::config(
            "calibrated prior needs a randomly drawn bandit instance",
        )),
    }
}

fn default_noise_family(env: &Environment) -> NoiseFamily {
    match env {
        Environment::Mab(e) => match e.family() {
            RewardFamily::Bernoulli => NoiseFamily::Bernoulli,
            RewardFamily::Gaussian { noise_sd } => NoiseFamily::Gaussian { sd: noise_sd },
            RewardFamily::Exponential => NoiseFamily::Exponential,
        },
        Environment::SemiBandit(e) => NoiseFamily::Gaussian { sd: e.noise_sd() },
        Environment::Mnl(_) => NoiseFamily::Poisson,
        Environment::Cascade(_) | Environment::Linear(_) => NoiseFamily::Bernoulli,
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(format!("{name} must be positive, got {v}")))
    }
}

fn parse_dist(t: &mut SpecTokens<'_>) -> Result<Option<WeightDistribution>> {
    let sigma: Option<f64> = t.take("sigma")?;
    let dist = t.take_str("dist");
    match (sigma, dist) {
        (Some(_), Some(_)) => Err(Error::config("give either sigma= or dist=, not both")),
        (Some(s), None) => WeightDistribution::gaussian(s).map(Some),
        (None, Some(d)) => d.parse().map(Some),
        (None, None) => Ok(None),
    }
}

impl FromStr for AlgSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut t = SpecTokens::parse(s)?;
        let head = t.head();
        let sub = t.positional().get(1).copied();
        let max_positional = if head == "ts" { 2 } else { 1 };
        if t.positional().len() > max_positional {
            return Err(Error::config(format!("unexpected field in algorithm spec '{s}'")));
        }
        let spec = match head {
            "mbe" => {
                let dist = parse_dist(&mut t)?.unwrap_or(WeightDistribution::GaussianUnitMean { sigma: 1.0 });
                let lambda = t.take("lambda")?.unwrap_or(DEFAULT_LAMBDA);
                let ridge: f64 = t.take("xi")?.unwrap_or(0.0);
                if !(ridge >= 0.0) {
                    return Err(Error::config(format!("xi must be nonnegative, got {ridge}")));
                }
                AlgSpec::Mbe {
                    params: TuningParams::new(lambda, dist)?,
                    replicates: replicates(t.take("B")?)?,
                    exact: t.take_bool("exact")?.unwrap_or(false),
                    ridge,
                    pseudo: t.take("lb_pseudo")?.unwrap_or_default(),
                }
            }
            "naive-mb" => {
                let dist = parse_dist(&mut t)?.unwrap_or(WeightDistribution::ExponentialUnit);
                dist.validate()?;
                AlgSpec::NaiveMb {
                    dist,
                    replicates: replicates(t.take("B")?)?,
                    exact: t.take_bool("exact")?.unwrap_or(true),
                }
            }
            "ts" => match sub {
                Some("bernoulli") => AlgSpec::TsBernoulli,
                Some("gauss") => {
                    let prior = match t.take_str("prior").as_deref() {
                        None => GaussPrior::Fixed(DEFAULT_TS_PRIOR.0, DEFAULT_TS_PRIOR.1),
                        Some("calibrated") => GaussPrior::Calibrated,
                        Some(raw) => {
                            let xs: Vec<f64> = raw
                                .split(',')
                                .map(|x| x.trim().parse())
                                .collect::<std::result::Result<_, _>>()
                                .map_err(|_| Error::config(format!("bad prior '{raw}'")))?;
                            match xs[..] {
                                [m, sd] if sd > 0.0 && m.is_finite() => GaussPrior::Fixed(m, sd),
                                _ => {
                                    return Err(Error::config(format!(
                                        "prior needs 'mean,sd' with sd > 0, got '{raw}'"
                                    )))
                                }
                            }
                        }
                    };
                    let noise_sd = t.take::<f64>("sd")?.map(|v| positive("sd", v)).transpose()?;
                    AlgSpec::TsGaussian { prior, noise_sd }
                }
                other => {
                    return Err(Error::config(format!("unknown Thompson sampling variant {other:?}")))
                }
            },
            "phe" => AlgSpec::Phe {
                a: positive("a", t.take("a")?.unwrap_or(1.0))?,
                family: t.take_str("family").map(|f| f.parse()).transpose()?,
            },
            "eg" => AlgSpec::EpsilonGreedy {
                a: positive("a", t.take("a")?.unwrap_or(1.0))?,
            },
            "oracle" => AlgSpec::Oracle,
            "uniform" => AlgSpec::Uniform,
            other => return Err(Error::config(format!("unknown algorithm '{other}'"))),
        };
        t.finish()?;
        Ok(spec)
    }
}

fn replicates(b: Option<usize>) -> Result<usize> {
    match b.unwrap_or(DEFAULT_REPLICATES) {
        0 => Err(Error::config("B must be at least 1")),
        b => Ok(b),
    }
}

fn fmt_dist(dist: &WeightDistribution) -> String {
    match dist {
        WeightDistribution::GaussianUnitMean { sigma } => format!("sigma={sigma}"),
        other => format!("dist={other}"),
    }
}

impl fmt::Display for AlgSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgSpec::Mbe {
                params,
                replicates,
                exact,
                ridge,
                pseudo,
            } => {
                write!(f, "mbe:lambda={}:{}", params.lambda, fmt_dist(&params.dist))?;
                if *exact {
                    f.write_str(":exact=true")?;
                } else {
                    write!(f, ":B={replicates}")?;
                }
                if *ridge != 0.0 {
                    write!(f, ":xi={ridge}")?;
                }
                if *pseudo != PseudoTerm::default() {
                    write!(f, ":lb_pseudo={pseudo}")?;
                }
                Ok(())
            }
            AlgSpec::NaiveMb {
                dist,
                replicates,
                exact,
            } => {
                write!(f, "naive-mb:{}", fmt_dist(dist))?;
                if !*exact {
                    write!(f, ":exact=false:B={replicates}")?;
                }
                Ok(())
            }
            AlgSpec::TsBernoulli => f.write_str("ts:bernoulli"),
            AlgSpec::TsGaussian { prior, noise_sd } => {
                f.write_str("ts:gauss")?;
                match prior {
                    GaussPrior::Fixed(m, s) => write!(f, ":prior={}", join_list(&[*m, *s]))?,
                    GaussPrior::Calibrated => f.write_str(":prior=calibrated")?,
                }
                if let Some(sd) = noise_sd {
                    write!(f, ":sd={sd}")?;
                }
                Ok(())
            }
            AlgSpec::Phe { a, family } => {
                write!(f, "phe:a={a}")?;
                if let Some(fam) = family {
                    write!(f, ":family={fam}")?;
                }
                Ok(())
            }
            AlgSpec::EpsilonGreedy { a } => write!(f, "eg:a={a}"),
            AlgSpec::Oracle => f.write_str("oracle"),
            AlgSpec::Uniform => f.write_str("uniform"),
        }
    }
}
