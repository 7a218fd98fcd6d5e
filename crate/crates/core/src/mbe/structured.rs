//! MBE for slate problems: per-item weighted estimates with pseudo-rewards,
//! kept as an ensemble, then turned into a slate by the problem's shape.

use super::{EnsembleState, Score};
use crate::envs::{Action, Feedback};
use crate::error::Result;
use crate::policy::{FeedbackRouter, Policy, SlateShape};
use crate::rng::RngStream;
use crate::weights::TuningParams;

#[derive(Clone, Debug)]
pub struct StructuredMbePolicy {
    shape: SlateShape,
    state: EnsembleState,
    params: TuningParams,
    router: FeedbackRouter,
    scratch: Vec<Score>,
}

impl StructuredMbePolicy {
    pub fn new(shape: SlateShape, items: usize, replicates: usize, params: TuningParams) -> Self {
        Self {
            shape,
            state: EnsembleState::new(replicates, items),
            params,
            router: FeedbackRouter::new(),
            scratch: Vec::with_capacity(items),
        }
    }

    pub fn state(&self) -> &EnsembleState {
        &self.state
    }
}

impl Policy for StructuredMbePolicy {
    fn select(&mut self, _t: usize, rng: &mut RngStream) -> Action {
        if let Some(offer) = self.router.frozen_offer() {
            return Action::Slate(offer.to_vec());
        }
        let b = self.state.sample_replicate(rng);
        self.state.scores_into(b, &mut self.scratch);
        Action::Slate(self.shape.assemble(&self.scratch, rng))
    }

    fn update(&mut self, action: &Action, feedback: &Feedback, rng: &mut RngStream) -> Result<()> {
        for (item, obs) in self.router.route(action, feedback) {
            self.state.update(item, obs, &self.params, rng);
        }
        Ok(())
    }
}
