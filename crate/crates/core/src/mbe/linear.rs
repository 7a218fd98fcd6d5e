//! MBE for fixed-arm linear bandits.
//!
//! Each replicate keeps the weighted ridge system
//!
//! ```text
//! V ← V + ω A Aᵀ + λω″ I,    b ← b + A (ω R + λω″·1),    θ̂ = V⁻¹ b
//! ```
//!
//! with `V₀ = (1 + ξ) I`. `V⁻¹` is maintained by rank-one Sherman–Morrison
//! steps; the `λω″ I` term is applied as `p` coordinate rank-one steps for
//! `p ≤ 20` and by re-inverting `V` otherwise.

use nalgebra::{DMatrix, DVector};

use super::{select_argmax, Score};
use crate::envs::{Action, Feedback};
use crate::error::{Error, Result};
use crate::policy::Policy;
use crate::rng::RngStream;
use crate::weights::{TuningParams, WeightTriplet};

/// Where the pseudo-reward weight enters the Gram matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PseudoTerm {
    /// `λω″ I`, as in the published recursion.
    #[default]
    Identity,
    /// `λω″ A Aᵀ`, symmetric with the `b` update.
    Feature,
}

impl std::str::FromStr for PseudoTerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(PseudoTerm::Identity),
            "feature" => Ok(PseudoTerm::Feature),
            _ => Err(Error::config(format!("lb_pseudo must be identity or feature, got '{s}'"))),
        }
    }
}

impl std::fmt::Display for PseudoTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PseudoTerm::Identity => "identity",
            PseudoTerm::Feature => "feature",
        })
    }
}

/// Sherman–Morrison denominators `ω⁻¹ + uᵀV⁻¹u` below this trigger a full
/// re-inversion instead of the rank-one step.
pub const SM_DENOMINATOR_EPS: f64 = 1e-12;
/// Largest dimension for which the identity pseudo-term is applied as
/// coordinate rank-one steps.
pub const MAX_COORDINATE_UPDATE_DIM: usize = 20;
/// Every this many updates `V⁻¹V` is compared with `I`.
const INVERSE_CHECK_PERIOD: usize = 16;
const INVERSE_CHECK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearReplicate {
    v: DMatrix<f64>,
    v_inv: DMatrix<f64>,
    b: DVector<f64>,
    theta: DVector<f64>,
    updates: usize,
    reinversions: usize,
}

impl LinearReplicate {
    pub fn new(dim: usize, ridge: f64) -> Self {
        let scale = 1.0 + ridge;
        Self {
            v: DMatrix::identity(dim, dim) * scale,
            v_inv: DMatrix::identity(dim, dim) / scale,
            b: DVector::zeros(dim),
            theta: DVector::zeros(dim),
            updates: 0,
            reinversions: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn v_inv(&self) -> &DMatrix<f64> {
        &self.v_inv
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    /// How many times `V` was re-inverted from scratch.
    pub fn reinversions(&self) -> usize {
        self.reinversions
    }

    pub fn update(
        &mut self,
        feature: &DVector<f64>,
        reward: f64,
        w: WeightTriplet,
        lambda: f64,
        pseudo: PseudoTerm,
    ) -> Result<()> {
        assert_eq!(feature.len(), self.dim(), "feature dimension mismatch");
        let pseudo_weight = lambda * w.omega_dprime;
        let mut stale = self.rank_one(feature, w.omega);
        match pseudo {
            PseudoTerm::Feature => stale |= self.rank_one(feature, pseudo_weight),
            PseudoTerm::Identity if pseudo_weight != 0.0 => {
                if self.dim() <= MAX_COORDINATE_UPDATE_DIM {
                    for i in 0..self.dim() {
                        stale |= self.coordinate_rank_one(i, pseudo_weight);
                    }
                } else {
                    for i in 0..self.dim() {
                        self.v[(i, i)] += pseudo_weight;
                    }
                    stale = true;
                }
            }
            PseudoTerm::Identity => {}
        }
        self.b.axpy(w.omega * reward + pseudo_weight, feature, 1.0);
        self.updates += 1;
        if !stale && self.updates % INVERSE_CHECK_PERIOD == 0 {
            stale = self.inverse_drift() > INVERSE_CHECK_TOL;
        }
        if stale {
            self.reinvert()?;
        }
        self.refresh_theta();
        Ok(())
    }

    /// `V += w u uᵀ` with the matching inverse update. Returns true when the
    /// inverse could not be updated in place.
    fn rank_one(&mut self, u: &DVector<f64>, w: f64) -> bool {
        if w == 0.0 {
            return false;
        }
        self.v.ger(w, u, u, 1.0);
        let z = &self.v_inv * u;
        let denom = 1.0 / w + u.dot(&z);
        if denom.abs() < SM_DENOMINATOR_EPS || !denom.is_finite() {
            return true;
        }
        self.v_inv.ger(-1.0 / denom, &z, &z, 1.0);
        false
    }

    fn coordinate_rank_one(&mut self, i: usize, w: f64) -> bool {
        self.v[(i, i)] += w;
        let z = self.v_inv.column(i).into_owned();
        let denom = 1.0 / w + z[i];
        if denom.abs() < SM_DENOMINATOR_EPS || !denom.is_finite() {
            return true;
        }
        self.v_inv.ger(-1.0 / denom, &z, &z, 1.0);
        false
    }

    fn inverse_drift(&self) -> f64 {
        let prod = &self.v_inv * &self.v;
        let n = self.dim();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (prod[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }

    fn reinvert(&mut self) -> Result<()> {
        self.v_inv = self
            .v
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numeric("weighted Gram matrix is singular".into()))?;
        self.reinversions += 1;
        Ok(())
    }

    /// `θ̂ = V⁻¹ b` plus one step of iterative refinement against `V`.
    fn refresh_theta(&mut self) {
        self.theta = &self.v_inv * &self.b;
        let residual = &self.b - &self.v * &self.theta;
        self.theta += &self.v_inv * residual;
    }
}

/// Solves `V θ = b` by Cholesky factorization.
pub fn lb_batch_solve(v: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = v
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numeric("matrix is not symmetric positive definite".into()))?;
    Ok(chol.solve(b))
}

/// Ensemble MBE over linear replicates. The first `p` rounds pull arms
/// `0..p` in order, then each round acts greedily on one random replicate.
#[derive(Clone, Debug)]
pub struct LinearMbePolicy {
    features: Vec<DVector<f64>>,
    replicates: Vec<LinearReplicate>,
    params: TuningParams,
    pseudo: PseudoTerm,
    scratch: Vec<Score>,
}

impl LinearMbePolicy {
    pub fn new(
        features: Vec<DVector<f64>>,
        replicates: usize,
        ridge: f64,
        params: TuningParams,
        pseudo: PseudoTerm,
    ) -> Self {
        assert!(replicates >= 1);
        let dim = features.first().map_or(0, |x| x.len());
        Self {
            replicates: vec![LinearReplicate::new(dim, ridge); replicates],
            scratch: Vec::with_capacity(features.len()),
            features,
            params,
            pseudo,
        }
    }

    pub fn replicates(&self) -> &[LinearReplicate] {
        &self.replicates
    }
}

impl Policy for LinearMbePolicy {
    fn select(&mut self, t: usize, rng: &mut RngStream) -> Action {
        let dim = self.replicates[0].dim();
        if t >= 1 && t <= dim && dim <= self.features.len() {
            return Action::Arm(t - 1);
        }
        let b = rand::Rng::random_range(rng, 0..self.replicates.len());
        let theta = self.replicates[b].theta();
        self.scratch.clear();
        self.scratch
            .extend(self.features.iter().map(|x| Score::new(x.dot(theta))));
        Action::Arm(select_argmax(&self.scratch, rng))
    }

    fn update(&mut self, action: &Action, feedback: &Feedback, rng: &mut RngStream) -> Result<()> {
        let Feedback::Reward(r) = feedback else {
            panic!("linear policy got {feedback:?}");
        };
        let x = &self.features[action.arm()];
        for rep in &mut self.replicates {
            let w = self.params.dist.sample_triplet(rng);
            rep.update(x, *r, w, self.params.lambda, self.pseudo)?;
        }
        Ok(())
    }
}
