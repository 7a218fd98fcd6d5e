//! Multiplier bootstrap exploration for bandits, with baselines, synthetic
//! environments, a deterministic experiment runner and numeric checks of
//! the supporting lemmas.

pub mod algs;
pub mod baselines;
pub mod cli;
pub mod config;
pub mod envs;
pub mod error;
mod grammar;
pub mod mbe;
pub mod output;
pub mod plot;
pub mod policy;
pub mod rng;
pub mod simulator;
pub mod theorycheck;
pub mod weights;

pub use algs::AlgSpec;
pub use envs::{Action, EnvSpec, Environment, Feedback};
pub use error::{Error, Result};
pub use policy::Policy;
pub use rng::RngStream;
