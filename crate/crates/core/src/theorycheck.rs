//! Numeric checks of the lemmas behind the regret analysis.
//!
//! Deterministic checks use quadrature; Monte-Carlo checks take an explicit
//! [`RngStream`] and accept within three standard errors.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use rand_distr::{Binomial, Distribution, Gamma, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::weights::WeightDistribution;

/// One inequality evaluated at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckPoint {
    pub point: String,
    pub observed: f64,
    pub bound_lo: f64,
    pub bound_hi: f64,
    pub pass: bool,
}

impl CheckPoint {
    fn new(point: impl Into<String>, observed: f64, bound_lo: f64, bound_hi: f64, pass: bool) -> Self {
        Self {
            point: point.into(),
            observed,
            bound_lo,
            bound_hi,
            pass,
        }
    }

    /// Distance to the nearest bound, negative when outside.
    pub fn slack(&self) -> f64 {
        (self.observed - self.bound_lo).min(self.bound_hi - self.observed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: String,
    /// Grid or sampling setup, human readable.
    pub setup: String,
    pub seed: Option<u64>,
    pub points: Vec<CheckPoint>,
    pub pass: bool,
    /// Smallest slack over the points.
    pub margin: f64,
}

impl CheckReport {
    fn new(name: &str, setup: String, seed: Option<u64>, points: Vec<CheckPoint>) -> Self {
        let pass = points.iter().all(|p| p.pass);
        let margin = points.iter().map(CheckPoint::slack).fold(f64::INFINITY, f64::min);
        Self {
            name: name.to_string(),
            setup,
            seed,
            points,
            pass,
            margin,
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} ({})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.setup
        )?;
        if let Some(seed) = self.seed {
            write!(f, " seed={seed}")?;
        }
        writeln!(f, " margin={:.3e}", self.margin)?;
        for p in &self.points {
            writeln!(
                f,
                "    {:<24} observed={:<14.6e} bounds=[{:.6e}, {:.6e}] {}",
                p.point,
                p.observed,
                p.bound_lo,
                p.bound_hi,
                if p.pass { "ok" } else { "VIOLATED" }
            )?;
        }
        Ok(())
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    step(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 50)
}

/// `e^{x²} erfc(x) = (2/√π) ∫₀^∞ e^{-2xu - u²} du` for `x ≥ 0`, by
/// quadrature. The factor `e^{x²}` is absorbed into the integrand, so large
/// `x` does not overflow.
pub fn scaled_erfc(x: f64) -> f64 {
    assert!(x >= 0.0);
    let f = |u: f64| (-(2.0 * x * u + u * u)).exp();
    // The integrand is below 1e-300 past u = 27.
    let pieces = [0.0, 0.5, 2.0, 6.0, 27.0];
    let total: f64 = pieces
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], 1e-16))
        .sum();
    2.0 / PI.sqrt() * total
}

/// `P(Z > x)` for standard normal `Z`, `x ≥ 0`.
pub fn normal_tail(x: f64) -> f64 {
    let y = x / std::f64::consts::SQRT_2;
    0.5 * (-y * y).exp() * scaled_erfc(y)
}

/// The default tail grid `0, 0.5, …, 5`.
pub fn default_tail_grid() -> Vec<f64> {
    (0..=10).map(|i| 0.5 * i as f64).collect()
}

/// `(1/4) e^{-x²} < P(Z > x) ≤ (1/2) e^{-x²/2}`.
pub fn check_gaussian_tail(x_grid: &[f64]) -> CheckReport {
    let points = x_grid
        .iter()
        .map(|&x| {
            assert!((0.0..=6.0).contains(&x), "tail grid point {x} outside [0, 6]");
            let p = normal_tail(x);
            let lo = 0.25 * (-x * x).exp();
            let hi = 0.5 * (-x * x / 2.0).exp();
            // Equality at x = 0 is allowed up to rounding.
            let pass = p > lo && p <= hi * (1.0 + 1e-12);
            CheckPoint::new(format!("x={x}"), p, lo, hi, pass)
        })
        .collect();
    CheckReport::new("gaussian_tail", format!("{} grid points", x_grid.len()), None, points)
}

/// `e^{x²} erfc(x) ≤ 1` for `x ≥ 0`.
pub fn check_erfc_bound(x_grid: &[f64]) -> CheckReport {
    let points = x_grid
        .iter()
        .map(|&x| {
            let v = scaled_erfc(x);
            CheckPoint::new(format!("x={x}"), v, 0.0, 1.0, v <= 1.0 + 1e-10)
        })
        .collect();
    CheckReport::new("erfc_bound", format!("{} grid points", x_grid.len()), None, points)
}

/// `E exp(λ X̄²) ≤ e^{9/8}` at `λ = n/(8σ²)`.
///
/// Gaussian summands give the extremal closed form `(1 - 2λσ²/n)^{-1/2}`.
/// Rademacher summands scaled by `σ` are checked by Monte-Carlo, drawing
/// the number of `+σ` signs as a binomial.
pub fn check_subgaussian_mgf(n: u64, sigma: f64, samples: usize, rng: &mut RngStream) -> CheckReport {
    assert!(n >= 1 && sigma > 0.0 && samples >= 2);
    let bound = (9.0f64 / 8.0).exp();
    let lambda = n as f64 / (8.0 * sigma * sigma);
    let closed = (1.0 - 2.0 * lambda * sigma * sigma / n as f64).powf(-0.5);
    let mut points = vec![
        CheckPoint::new("lambda=0", 1.0, f64::NEG_INFINITY, bound, 1.0 <= bound),
        CheckPoint::new("gaussian_closed_form", closed, f64::NEG_INFINITY, bound, closed <= bound),
    ];
    let seed = rng.master_seed();
    let binom = Binomial::new(n, 0.5).expect("valid binomial");
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let plus = binom.sample(rng) as f64;
        let mean = sigma * (2.0 * plus - n as f64) / n as f64;
        let v = (lambda * mean * mean).exp();
        sum += v;
        sum_sq += v * v;
    }
    let m = samples as f64;
    let mc = sum / m;
    let se = ((sum_sq / m - mc * mc).max(0.0) / (m - 1.0)).sqrt();
    points.push(CheckPoint::new(
        "rademacher_monte_carlo",
        mc,
        f64::NEG_INFINITY,
        bound + 3.0 * se,
        mc <= bound + 3.0 * se,
    ));
    CheckReport::new(
        "subgaussian_mgf",
        format!("n={n}, sigma={sigma}, {samples} samples"),
        Some(seed),
        points,
    )
}

/// `P(|X|/|Y| > c) ≤ 2P(X > cY) + P(Y < 0)` for independent
/// `X ~ N(0, 1)`, `Y ~ N(mean_y, 1)`.
pub fn check_gaussian_ratio(c_grid: &[f64], mean_y: f64, n_samples: usize, rng: &mut RngStream) -> CheckReport {
    check_gaussian_ratio_with(c_grid, 1.0, mean_y, n_samples, rng)
}

/// As [`check_gaussian_ratio`] with `X ~ N(0, sd_x²)`. Each `c` uses paired
/// samples, so the acceptance band is three standard errors of the
/// per-sample difference between the two sides.
pub fn check_gaussian_ratio_with(
    c_grid: &[f64],
    sd_x: f64,
    mean_y: f64,
    n_samples: usize,
    rng: &mut RngStream,
) -> CheckReport {
    assert!(mean_y > 0.0 && sd_x > 0.0 && n_samples >= 2);
    let seed = rng.master_seed();
    let points = c_grid
        .iter()
        .map(|&c| {
            assert!(c > 0.0, "ratio threshold must be positive");
            let (mut left, mut right, mut d_sum, mut d_sq) = (0u64, 0u64, 0.0, 0.0);
            for _ in 0..n_samples {
                let zx: f64 = StandardNormal.sample(rng);
                let zy: f64 = StandardNormal.sample(rng);
                let (x, y) = (sd_x * zx, mean_y + zy);
                let l = u64::from(x.abs() > c * y.abs());
                let r = 2 * u64::from(x > c * y) + u64::from(y < 0.0);
                left += l;
                right += r;
                let d = r as f64 - l as f64;
                d_sum += d;
                d_sq += d * d;
            }
            let m = n_samples as f64;
            let d_mean = d_sum / m;
            let se = ((d_sq / m - d_mean * d_mean).max(0.0) / (m - 1.0)).sqrt();
            let (l, r) = (left as f64 / m, right as f64 / m);
            CheckPoint::new(format!("c={c}"), l, f64::NEG_INFINITY, r + 3.0 * se, d_mean >= -3.0 * se)
        })
        .collect();
    CheckReport::new(
        "gaussian_ratio",
        format!("sd_x={sd_x}, mean_y={mean_y}, {n_samples} samples per c"),
        Some(seed),
        points,
    )
}

/// Asymptotic variance of `√s (Ȳ - (μ+λ)/(1+2λ))` as displayed alongside
/// the order-preservation argument: `(σ² + 2) σ_ω² / (1+2λ)²`.
pub fn clt_displayed_variance(lambda: f64, sigma_omega: f64, reward_sd: f64) -> f64 {
    (reward_sd * reward_sd + 2.0) * sigma_omega * sigma_omega / (1.0 + 2.0 * lambda).powi(2)
}

/// Delta-method variance of the same quantity over the weights, with the
/// rewards held fixed (sample mean `mean`, sample sd `reward_sd`):
/// `σ_ω² [σ² + (μ - c)² + λ²((1 - c)² + c²)] / (1+2λ)²` with
/// `c = (μ+λ)/(1+2λ)`.
pub fn clt_delta_variance(lambda: f64, sigma_omega: f64, reward_sd: f64, mean: f64) -> f64 {
    let c = (mean + lambda) / (1.0 + 2.0 * lambda);
    let inner = reward_sd * reward_sd
        + (mean - c).powi(2)
        + lambda * lambda * ((1.0 - c).powi(2) + c * c);
    sigma_omega * sigma_omega * inner / (1.0 + 2.0 * lambda).powi(2)
}

/// Reward mean used by the CLT check.
pub const CLT_REWARD_MEAN: f64 = 0.5;

/// Monte-Carlo variance of `√s (Ȳ - (μ+λ)/(1+2λ))` over Gaussian weights
/// for one fixed sample of `s` rewards from `N(0.5, reward_sd²)`.
/// Returns the variance, its standard error, and the sample's mean and sd.
pub fn clt_monte_carlo(
    lambda: f64,
    sigma_omega: f64,
    reward_sd: f64,
    s: usize,
    n_reps: usize,
    rng: &mut RngStream,
) -> (f64, f64, f64, f64) {
    let normal = Normal::new(CLT_REWARD_MEAN, reward_sd).expect("finite sd");
    let rewards: Vec<f64> = (0..s).map(|_| normal.sample(rng)).collect();
    let r_mean = rewards.iter().sum::<f64>() / s as f64;
    let r_sd = (rewards.iter().map(|r| (r - r_mean).powi(2)).sum::<f64>() / s as f64).sqrt();
    let dist = WeightDistribution::GaussianUnitMean { sigma: sigma_omega };
    let center = (CLT_REWARD_MEAN + lambda) / (1.0 + 2.0 * lambda);
    let stats: Vec<f64> = (0..n_reps)
        .map(|_| {
            let (mut num, mut den) = (0.0, 0.0);
            for r in &rewards {
                let w = dist.sample_triplet(rng);
                num += w.omega * r + lambda * w.omega_prime;
                den += w.omega + lambda * w.omega_prime + lambda * w.omega_dprime;
            }
            (s as f64).sqrt() * (num / den - center)
        })
        .collect();
    let m = n_reps as f64;
    let mean = stats.iter().sum::<f64>() / m;
    let var = stats.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let m4 = stats.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / m;
    let var_se = ((m4 - var * var).max(0.0) / m).sqrt();
    (var, var_se, r_mean, r_sd)
}

/// Compares the Monte-Carlo variance with the displayed asymptotic
/// variance at 10% relative tolerance. The delta-method value is reported
/// as an extra, unscored line in the setup string.
pub fn check_shifted_mean_clt(
    lambda: f64,
    sigma_omega: f64,
    reward_sd: f64,
    s: usize,
    n_reps: usize,
    rng: &mut RngStream,
) -> CheckReport {
    assert!(s >= 1000, "the CLT check needs s >= 1000");
    let seed = rng.master_seed();
    let (var, se, r_mean, r_sd) = clt_monte_carlo(lambda, sigma_omega, reward_sd, s, n_reps, rng);
    let target = clt_displayed_variance(lambda, sigma_omega, reward_sd);
    let delta = clt_delta_variance(lambda, sigma_omega, r_sd, r_mean);
    let point = variance_point("displayed", var, target);
    CheckReport::new(
        "shifted_mean_clt",
        format!(
            "lambda={lambda}, sigma_omega={sigma_omega}, reward_sd={reward_sd}, s={s}, \
             reps={n_reps}; mc_se={se:.2e}, delta_method={delta:.6}"
        ),
        Some(seed),
        vec![point],
    )
}

/// Same Monte-Carlo, scored against the delta-method variance.
pub fn check_shifted_mean_clt_delta(
    lambda: f64,
    sigma_omega: f64,
    reward_sd: f64,
    s: usize,
    n_reps: usize,
    rng: &mut RngStream,
) -> CheckReport {
    assert!(s >= 1000, "the CLT check needs s >= 1000");
    let seed = rng.master_seed();
    let (var, se, r_mean, r_sd) = clt_monte_carlo(lambda, sigma_omega, reward_sd, s, n_reps, rng);
    let target = clt_delta_variance(lambda, sigma_omega, r_sd, r_mean);
    CheckReport::new(
        "shifted_mean_clt_delta",
        format!(
            "lambda={lambda}, sigma_omega={sigma_omega}, reward_sd={reward_sd}, s={s}, \
             reps={n_reps}; mc_se={se:.2e}"
        ),
        Some(seed),
        vec![variance_point("delta_method", var, target)],
    )
}

fn variance_point(name: &str, observed: f64, target: f64) -> CheckPoint {
    // Targets near zero fall back to an absolute band.
    let tol = (0.1 * target).max(1e-9);
    CheckPoint::new(
        name,
        observed,
        target - tol,
        target + tol,
        (observed - target).abs() <= tol,
    )
}

/// `E exp(-s / (a X̄_s + b))` for `X̄_s` the mean of `s` unit exponentials
/// decays in `s`: each estimate may exceed its predecessor by at most three
/// combined standard errors.
pub fn check_subexponential_decay(
    a: f64,
    b: f64,
    s_grid: &[u64],
    samples: usize,
    rng: &mut RngStream,
) -> CheckReport {
    assert!(a > 0.0 && b > 0.0 && samples >= 2);
    let seed = rng.master_seed();
    let mut points = Vec::with_capacity(s_grid.len());
    let mut prev: Option<(f64, f64)> = None;
    for &s in s_grid {
        let gamma = Gamma::new(s as f64, 1.0).expect("positive shape");
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..samples {
            let xbar = gamma.sample(rng) / s as f64;
            let v = (-(s as f64) / (a * xbar + b)).exp();
            sum += v;
            sq += v * v;
        }
        let m = samples as f64;
        let est = sum / m;
        let se = ((sq / m - est * est).max(0.0) / (m - 1.0)).sqrt();
        let hi = match prev {
            None => f64::INFINITY,
            Some((p, pse)) => p + 3.0 * (pse * pse + se * se).sqrt(),
        };
        points.push(CheckPoint::new(format!("s={s}"), est, 0.0, hi, est <= hi));
        prev = Some((est, se));
    }
    CheckReport::new(
        "subexponential_decay",
        format!("a={a}, b={b}, {samples} samples per s"),
        Some(seed),
        points,
    )
}

/// Exact outcome of the two-round double-or-nothing example.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Example1Count {
    /// Weight tuples with `Ȳ₁ > Ȳ₂`.
    pub favorable: u32,
    /// Of those, the tuples where both scores are defined.
    pub favorable_defined: u32,
    pub total: u32,
}

impl Example1Count {
    pub fn probability(&self) -> f64 {
        f64::from(self.favorable) / f64::from(self.total)
    }
}

/// Quadratic `c₀ + c₁λ + c₂λ²` with integer coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Quad([i64; 3]);

impl Quad {
    fn lin(c0: i64, c1: i64) -> Self {
        Quad([c0, c1, 0])
    }

    fn mul(self, o: Quad) -> Quad {
        let mut out = [0i64; 3];
        for i in 0..3 {
            for j in 0..3 - i {
                out[i + j] += self.0[i] * o.0[j];
            }
        }
        debug_assert!(self.0[2] * o.0[2] == 0 && self.0[1] * o.0[2] == 0 && self.0[2] * o.0[1] == 0);
        Quad(out)
    }

    fn sub(self, o: Quad) -> Quad {
        Quad([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }

    fn is_zero(self) -> bool {
        self.0 == [0, 0, 0]
    }

    fn eval(self, lambda: f64) -> f64 {
        self.0[0] as f64 + lambda * (self.0[1] as f64 + lambda * self.0[2] as f64)
    }
}

/// Counts the weight tuples `(ω₁, ω₁′, ω₁″, ω₂, ω₂′, ω₂″) ∈ {0, 2}⁶` for
/// which arm 1 (one reward 0) outscores arm 2 (one reward 1).
///
/// Scores are compared by cross-multiplying, as integer polynomials in
/// `λ`, so equal scores are detected exactly. A zero denominator makes a
/// score undefined, which ranks below every defined score.
pub fn enumerate_example1(lambda: f64) -> Example1Count {
    assert!(lambda >= 0.0 && lambda.is_finite());
    let mut favorable = 0;
    let mut favorable_defined = 0;
    for bits in 0u32..64 {
        // Weights are 2·bit; the common factor 2 cancels in every ratio.
        let b = |i: u32| i64::from((bits >> i) & 1);
        let (w1, w1p, w1pp, w2, w2p, w2pp) = (b(0), b(1), b(2), b(3), b(4), b(5));
        let n1 = Quad::lin(0, w1p);
        let d1 = Quad::lin(w1, w1p + w1pp);
        let n2 = Quad::lin(w2, w2p);
        let d2 = Quad::lin(w2, w2p + w2pp);
        let defined1 = d1.eval(lambda) != 0.0 && !d1.is_zero();
        let defined2 = d2.eval(lambda) != 0.0 && !d2.is_zero();
        let wins = match (defined1, defined2) {
            (false, _) => false,
            (true, false) => true,
            (true, true) => {
                // Both denominators are positive here.
                let diff = n1.mul(d2).sub(n2.mul(d1));
                !diff.is_zero() && diff.eval(lambda) > 0.0
            }
        };
        favorable += u32::from(wins);
        favorable_defined += u32::from(wins && defined2);
    }
    Example1Count {
        favorable,
        favorable_defined,
        total: 64,
    }
}

/// Enumeration as a report: the probability must reach `(1/2)^6`.
pub fn check_example1(lambda: f64) -> CheckReport {
    let count = enumerate_example1(lambda);
    let floor = 1.0 / 64.0;
    let p = count.probability();
    CheckReport::new(
        "example1_enumeration",
        format!(
            "lambda={lambda}, {}/{} tuples favorable, {} with both scores defined",
            count.favorable, count.total, count.favorable_defined
        ),
        None,
        vec![CheckPoint::new(format!("lambda={lambda}"), p, floor, 1.0, p >= floor)],
    )
}

/// Every check at its default setting, each with its own child stream of
/// `seed`.
pub fn run_all(seed: u64) -> Vec<CheckReport> {
    let root = RngStream::new(seed);
    let stream = |i: u64| root.derive(i);
    vec![
        check_gaussian_tail(&default_tail_grid()),
        check_erfc_bound(&default_tail_grid()),
        check_subgaussian_mgf(100, 1.0, 1_000_000, &mut stream(1)),
        check_gaussian_ratio(&[0.25, 0.5, 1.0, 2.0, 10.0, 1000.0], 3.0, 1_000_000, &mut stream(2)),
        check_gaussian_ratio_with(&[1.0], 1e-6, 3.0, 100_000, &mut stream(3)),
        check_shifted_mean_clt(0.5, 1.0, 1.0, 1000, 4000, &mut stream(4)),
        check_shifted_mean_clt_delta(0.5, 1.0, 1.0, 1000, 4000, &mut stream(4)),
        check_subexponential_decay(1.0, 1.0, &[1, 2, 4, 8, 16, 32, 64], 100_000, &mut stream(5)),
        check_example1(0.5),
    ]
}

/// Writes `check,point,observed,bound_lo,bound_hi,pass`.
pub fn write_reports_csv(reports: &[CheckReport], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(e, path))?;
    w.write_record(["check", "point", "observed", "bound_lo", "bound_hi", "pass"])?;
    for r in reports {
        for p in &r.points {
            w.write_record([
                r.name.clone(),
                p.point.clone(),
                p.observed.to_string(),
                p.bound_lo.to_string(),
                p.bound_hi.to_string(),
                p.pass.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_io(e: csv::Error, path: &Path) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::Csv(e)
    }
}
