//! Episodes, replication across runs, aggregation and tuning sweeps.
//!
//! Every run draws its own environment instance. Random streams are
//! addressed by path, so results do not depend on how runs are scheduled
//! across threads.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::algs::AlgSpec;
use crate::envs::{Action, EnvSpec, Environment, Feedback};
use crate::error::{Error, Result};
use crate::policy::Policy;
use crate::rng::{stable_hash, RngStream};

/// Stream index of the environment instance within a run.
const INSTANCE: u64 = 0;
const POLICY: u64 = 1;
const PULLS: u64 = 2;

/// How a round's regret is charged.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Accounting {
    /// Optimal expected value minus the chosen action's expected value.
    #[default]
    Expected,
    /// Optimal expected value minus the reward actually observed.
    Realized,
}

/// Cumulative regret after each round `1..=T`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretCurve {
    pub cumulative: Vec<f64>,
}

impl RegretCurve {
    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    /// Regret after round `t` (1-based).
    pub fn at(&self, t: usize) -> f64 {
        self.cumulative[t - 1]
    }

    pub fn last(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Scalar payoff actually received.
pub fn realized_value(env: &Environment, action: &Action, feedback: &Feedback) -> f64 {
    match feedback {
        Feedback::Reward(r) => *r,
        Feedback::Cascade(o) => f64::from(u8::from(o.click.is_some())),
        Feedback::SemiBandit(rs) => rs.iter().sum(),
        Feedback::Choice(choice) => match (env, choice) {
            (Environment::Mnl(e), Some(i)) => e.revenues()[*i],
            _ => {
                debug_assert!(choice.is_none(), "choice feedback from {:?}", action);
                0.0
            }
        },
    }
}

/// `T` rounds of select, pull, update. `rng` is the stream for this
/// (run, algorithm) pair; policy randomness and environment noise use
/// disjoint children of it.
pub fn run_episode(
    env: &Environment,
    policy: &mut dyn Policy,
    horizon: usize,
    rng: &RngStream,
) -> Result<RegretCurve> {
    run_episode_with(env, policy, horizon, Accounting::Expected, rng)
}

pub fn run_episode_with(
    env: &Environment,
    policy: &mut dyn Policy,
    horizon: usize,
    accounting: Accounting,
    rng: &RngStream,
) -> Result<RegretCurve> {
    let mut policy_rng = rng.derive(POLICY);
    let mut pull_rng = rng.derive(PULLS);
    let best = env.optimal_value();
    let mut total = 0.0;
    let mut cumulative = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let action = policy.select(t, &mut policy_rng);
        let feedback = env.pull(&action, &mut pull_rng);
        let gap = match accounting {
            Accounting::Expected => {
                let gap = best - env.expected_value(&action);
                debug_assert!(gap > -1e-9, "action beats the optimum by {}", -gap);
                gap.max(0.0)
            }
            Accounting::Realized => best - realized_value(env, &action, &feedback),
        };
        total += gap;
        cumulative.push(total);
        policy.update(&action, &feedback, &mut policy_rng)?;
    }
    Ok(RegretCurve { cumulative })
}

/// Everything needed to run and record one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub experiment_id: String,
    pub env: EnvSpec,
    pub algorithms: Vec<AlgSpec>,
    pub horizon: usize,
    pub runs: usize,
    pub seed: u64,
    /// Rounds between recorded points; `None` means `max(1, T/200)`.
    pub stride: Option<usize>,
    pub accounting: Accounting,
    pub raw_csv: Option<PathBuf>,
    pub aggregate_csv: Option<PathBuf>,
    pub plot_svg: Option<PathBuf>,
}

impl SimConfig {
    pub fn new(env: EnvSpec, algorithms: Vec<AlgSpec>, horizon: usize, runs: usize, seed: u64) -> Self {
        Self {
            experiment_id: "exp".to_string(),
            env,
            algorithms,
            horizon,
            runs,
            seed,
            stride: None,
            accounting: Accounting::Expected,
            raw_csv: None,
            aggregate_csv: None,
            plot_svg: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::config("no algorithms"));
        }
        if self.horizon == 0 {
            return Err(Error::config("T must be at least 1"));
        }
        if self.runs == 0 {
            return Err(Error::config("runs must be at least 1"));
        }
        if self.stride == Some(0) {
            return Err(Error::config("stride must be at least 1"));
        }
        if self.experiment_id.is_empty() || self.experiment_id.contains([',', '"', '\n']) {
            return Err(Error::config(format!(
                "experiment id '{}' must be nonempty and free of commas, quotes and newlines",
                self.experiment_id
            )));
        }
        for alg in &self.algorithms {
            alg.check_compatible(self.env.kind())?;
        }
        Ok(())
    }

    pub fn stride(&self) -> usize {
        self.stride.unwrap_or((self.horizon / 200).max(1))
    }

    /// Recorded rounds: every `stride`-th round, plus `T` itself.
    pub fn checkpoints(&self) -> Vec<usize> {
        let stride = self.stride();
        let mut out: Vec<usize> = (1..=self.horizon / stride).map(|i| i * stride).collect();
        if out.last() != Some(&self.horizon) {
            out.push(self.horizon);
        }
        out
    }

    /// Root stream of run `run`.
    pub fn run_stream(&self, run: usize) -> RngStream {
        RngStream::at(self.seed, vec![stable_hash(&self.experiment_id), run as u64])
    }

    /// Notices about MBE settings outside the guaranteed range.
    pub fn tuning_notices(&self) -> Vec<String> {
        self.algorithms.iter().filter_map(AlgSpec::tuning_notice).collect()
    }
}

/// Checkpointed curve of one algorithm in one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunCurve {
    pub algorithm: usize,
    pub run: usize,
    pub values: Vec<f64>,
}

/// Mean and standard error per checkpoint for one algorithm.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub algorithm: String,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_runs: usize,
}

impl Series {
    pub fn final_mean(&self) -> f64 {
        *self.mean.last().expect("series has a checkpoint")
    }

    pub fn final_stderr(&self) -> f64 {
        *self.stderr.last().expect("series has a checkpoint")
    }

    /// Mean and standard error at round `t`, if recorded.
    pub fn at(&self, checkpoints: &[usize], t: usize) -> Option<(f64, f64)> {
        let i = checkpoints.iter().position(|&c| c == t)?;
        Some((self.mean[i], self.stderr[i]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregatedResult {
    pub experiment_id: String,
    pub checkpoints: Vec<usize>,
    pub series: Vec<Series>,
}

impl AggregatedResult {
    pub fn series(&self, algorithm: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.algorithm == algorithm)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub labels: Vec<String>,
    pub checkpoints: Vec<usize>,
    /// In (run, algorithm) order.
    pub curves: Vec<RunCurve>,
    pub aggregate: AggregatedResult,
}

/// Mean and `sd / √n` of `values`. The sum runs over the sorted values so
/// the result does not depend on their order.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n > 0, "no values to aggregate");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let mut dev: Vec<f64> = sorted.iter().map(|v| (v - mean) * (v - mean)).collect();
    dev.sort_by(f64::total_cmp);
    let var = dev.iter().sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Aggregates per-run curves, indexed `[algorithm][run][checkpoint]`.
pub fn aggregate(
    experiment_id: &str,
    labels: &[String],
    checkpoints: &[usize],
    per_alg: &[Vec<Vec<f64>>],
) -> AggregatedResult {
    let series = labels
        .iter()
        .zip(per_alg)
        .map(|(label, runs)| {
            let (mean, stderr) = (0..checkpoints.len())
                .map(|c| {
                    let column: Vec<f64> = runs.iter().map(|r| r[c]).collect();
                    mean_stderr(&column)
                })
                .unzip();
            Series {
                algorithm: label.clone(),
                mean,
                stderr,
                n_runs: runs.len(),
            }
        })
        .collect();
    AggregatedResult {
        experiment_id: experiment_id.to_string(),
        checkpoints: checkpoints.to_vec(),
        series,
    }
}

fn run_one(config: &SimConfig, checkpoints: &[usize], run: usize) -> Result<Vec<RunCurve>> {
    let root = config.run_stream(run);
    let env = config.env.instantiate(&mut root.derive(INSTANCE))?;
    config
        .algorithms
        .iter()
        .enumerate()
        .map(|(a, alg)| {
            let mut policy = alg.build(&env, &config.env)?;
            let stream = root.derive(stable_hash(&alg.label()));
            let curve =
                run_episode_with(&env, policy.as_mut(), config.horizon, config.accounting, &stream)?;
            Ok(RunCurve {
                algorithm: a,
                run,
                values: checkpoints.iter().map(|&t| curve.at(t)).collect(),
            })
        })
        .collect()
}

/// Runs every algorithm on `runs` fresh instances, in parallel across runs.
pub fn run_experiment(config: &SimConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let checkpoints = config.checkpoints();
    let per_run: Vec<Vec<RunCurve>> = (0..config.runs)
        .into_par_iter()
        .map(|run| run_one(config, &checkpoints, run))
        .collect::<Result<_>>()?;
    let labels: Vec<String> = config.algorithms.iter().map(AlgSpec::label).collect();
    let mut per_alg = vec![Vec::with_capacity(config.runs); labels.len()];
    for curve in per_run.iter().flatten() {
        per_alg[curve.algorithm].push(curve.values.clone());
    }
    let aggregate = aggregate(&config.experiment_id, &labels, &checkpoints, &per_alg);
    Ok(ExperimentResult {
        labels,
        checkpoints,
        curves: per_run.into_iter().flatten().collect(),
        aggregate,
    })
}

/// One grid point of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub final_mean: f64,
    pub final_stderr: f64,
}

#[derive(Clone, Debug)]
pub struct SweepEntry {
    pub base: AlgSpec,
    /// Empty for algorithms without a tuning parameter.
    pub points: Vec<SweepPoint>,
    pub best_value: Option<f64>,
    pub best: AlgSpec,
    pub best_series: Series,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub checkpoints: Vec<usize>,
    pub entries: Vec<SweepEntry>,
}

impl SweepReport {
    /// Best-tuned curve of every algorithm, labeled by its tuned spec.
    pub fn best_aggregate(&self, experiment_id: &str) -> AggregatedResult {
        AggregatedResult {
            experiment_id: experiment_id.to_string(),
            checkpoints: self.checkpoints.clone(),
            series: self.entries.iter().map(|e| e.best_series.clone()).collect(),
        }
    }
}

/// The grid `2^(k-4)`, `k = 0..=6`.
pub fn default_grid() -> Vec<f64> {
    (0..=6).map(|k| 2f64.powi(k - 4)).collect()
}

/// Runs each algorithm over `grid` and keeps the value with the lowest
/// final mean regret; ties go to the smaller value. Algorithms without a
/// tuning parameter run once.
pub fn sweep(config: &SimConfig, grid: &[f64]) -> Result<SweepReport> {
    if grid.is_empty() {
        return Err(Error::config("sweep grid is empty"));
    }
    config.validate()?;
    let single = |alg: AlgSpec| -> Result<Series> {
        let cfg = SimConfig {
            algorithms: vec![alg],
            ..config.clone()
        };
        let mut res = run_experiment(&cfg)?;
        Ok(res.aggregate.series.remove(0))
    };
    let mut entries = Vec::with_capacity(config.algorithms.len());
    for base in &config.algorithms {
        if base.with_tuning(grid[0])?.is_none() {
            entries.push(SweepEntry {
                base: base.clone(),
                points: Vec::new(),
                best_value: None,
                best: base.clone(),
                best_series: single(base.clone())?,
            });
            continue;
        }
        let mut points = Vec::with_capacity(grid.len());
        let mut best: Option<(f64, AlgSpec, Series)> = None;
        for &value in grid {
            let alg = base.with_tuning(value)?.expect("tunable");
            log::info!("sweep {alg}");
            let series = single(alg.clone())?;
            points.push(SweepPoint {
                value,
                final_mean: series.final_mean(),
                final_stderr: series.final_stderr(),
            });
            let better = match &best {
                None => true,
                Some((v, _, s)) => {
                    let (m, bm) = (series.final_mean(), s.final_mean());
                    m < bm || (m == bm && value < *v)
                }
            };
            if better {
                best = Some((value, alg, series));
            }
        }
        let (value, alg, series) = best.expect("grid is nonempty");
        entries.push(SweepEntry {
            base: base.clone(),
            points,
            best_value: Some(value),
            best: alg,
            best_series: series,
        });
    }
    Ok(SweepReport {
        checkpoints: config.checkpoints(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::RewardFamily;

    fn two_arm_config(algs: &[&str], horizon: usize, runs: usize) -> SimConfig {
        SimConfig::new(
            "mab:bernoulli:means=0,1".parse().unwrap(),
            algs.iter().map(|a| a.parse().unwrap()).collect(),
            horizon,
            runs,
            7,
        )
    }

    #[test]
    fn oracle_has_zero_regret() {
        let spec: EnvSpec = "cascade:L=10:K=3".parse().unwrap();
        let env = spec.instantiate(&mut RngStream::new(1)).unwrap();
        let mut p = AlgSpec::Oracle.build(&env, &spec).unwrap();
        let c = run_episode(&env, p.as_mut(), 300, &RngStream::new(2)).unwrap();
        assert!(c.cumulative.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uniform_realized_regret_is_half_per_round() {
        let env = Environment::Mab(crate::envs::MabEnv::new(vec![0.0, 1.0], RewardFamily::Bernoulli).unwrap());
        let spec: EnvSpec = "mab:bernoulli:means=0,1".parse().unwrap();
        let mut p = AlgSpec::Uniform.build(&env, &spec).unwrap();
        let c = run_episode_with(&env, p.as_mut(), 1000, Accounting::Realized, &RngStream::new(3)).unwrap();
        assert!((c.last() - 500.0).abs() <= 3.0 * (1000.0f64 * 0.25).sqrt());
    }

    #[test]
    fn curves_are_nondecreasing_and_deterministic() {
        for env_s in ["mab:gauss:K=5", "semi:L=10:K=4", "mnl:L=8:K=3", "lin:p=5:K=20"] {
            let spec: EnvSpec = env_s.parse().unwrap();
            let env = spec.instantiate(&mut RngStream::new(4)).unwrap();
            let alg: AlgSpec = "mbe:B=5".parse().unwrap();
            let run = || {
                let mut p = alg.build(&env, &spec).unwrap();
                run_episode(&env, p.as_mut(), 200, &RngStream::new(5)).unwrap()
            };
            let c = run();
            assert!(c.cumulative.windows(2).all(|w| w[1] >= w[0]), "{env_s}");
            assert!(c.cumulative[0] >= 0.0);
            assert_eq!(c, run());
        }
    }

    #[test]
    fn single_run_has_zero_stderr() {
        let res = run_experiment(&two_arm_config(&["uniform"], 50, 1)).unwrap();
        let s = &res.aggregate.series[0];
        assert!(s.stderr.iter().all(|&e| e == 0.0));
        assert_eq!(s.mean, res.curves[0].values);
    }

    #[test]
    fn two_sample_formulas() {
        let (m, se) = mean_stderr(&[3.0, 7.0]);
        assert_eq!(m, 5.0);
        assert!((se - 2.0).abs() < 1e-15);
    }

    #[test]
    fn aggregation_ignores_run_order() {
        let xs = [0.1, 1e16, -3.7, 2.2, 1.0, -1e16, 0.3];
        let mut ys = xs;
        ys.reverse();
        assert_eq!(mean_stderr(&xs), mean_stderr(&ys));
    }

    #[test]
    fn experiment_output_independent_of_thread_count() {
        let cfg = two_arm_config(&["mbe:B=5", "eg:a=1"], 100, 6);
        let a = run_experiment(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| run_experiment(&cfg).unwrap());
        assert_eq!(a.curves, b.curves);
        assert_eq!(a.aggregate, b.aggregate);
    }

    #[test]
    fn checkpoints_default_stride() {
        let cfg = two_arm_config(&["uniform"], 1000, 1);
        let cp = cfg.checkpoints();
        assert_eq!(cp.len(), 200);
        assert_eq!(cp[0], 5);
        assert_eq!(*cp.last().unwrap(), 1000);
        let small = two_arm_config(&["uniform"], 7, 1);
        assert_eq!(small.checkpoints(), (1..=7).collect::<Vec<_>>());
        let odd = SimConfig { stride: Some(3), ..small };
        assert_eq!(odd.checkpoints(), vec![3, 6, 7]);
    }

    #[test]
    fn empty_algorithm_list_is_rejected() {
        let err = run_experiment(&two_arm_config(&[], 10, 1)).unwrap_err();
        assert!(err.to_string().contains("no algorithms"));
    }

    #[test]
    fn default_grid_values() {
        assert_eq!(default_grid(), vec![0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0]);
    }

    #[test]
    fn sweep_ties_go_to_smaller_value() {
        // The oracle ignores its knob, so every grid point ties at zero.
        let cfg = two_arm_config(&["eg:a=1", "oracle"], 30, 2);
        let rep = sweep(&cfg, &[0.5]).unwrap();
        assert_eq!(rep.entries[0].best_value, Some(0.5));
        assert_eq!(rep.entries[1].best_value, None);
        let cfg = two_arm_config(&["mbe:B=3"], 20, 2);
        let dup = sweep(&cfg, &[2.0, 1.0, 1.0]).unwrap();
        let best = dup.entries[0].best_value.unwrap();
        let min = dup.entries[0]
            .points
            .iter()
            .map(|p| p.final_mean)
            .fold(f64::INFINITY, f64::min);
        let smallest_at_min = dup.entries[0]
            .points
            .iter()
            .filter(|p| p.final_mean == min)
            .map(|p| p.value)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(best, smallest_at_min);
    }
}
