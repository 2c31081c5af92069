//! Contextual bandit machinery: history, context features, the distortion
//! constraint, Thompson sampling, EXP3 and regret accounting.

mod exp3;
mod history;
mod learner;
mod regret;
mod ts;

pub use exp3::{exp3_distribution, exp3_estimate, Exp3State, DEFAULT_RIDGE};
pub use history::{build_context, ContextVector, HistoryEntry, ObservationHistory, PairStats};
pub use learner::{Learner, LearnerKind};
pub use regret::RegretLedger;
pub use ts::{argmin_inner, ts_select, ts_update, TsState};

use crate::spectrum::{distortion, Catalog, CostWeights, Waveform};

/// Context feature dimension (mean, variance, last cost).
pub const CONTEXT_DIM: usize = 3;

/// Waveforms whose distortion relative to `prev` is strictly below `dhat`.
/// Without a previous pulse every waveform qualifies.
pub fn constrain_actions(
    catalog: &Catalog,
    prev: Option<&Waveform>,
    weights: &CostWeights,
) -> Vec<usize> {
    match prev {
        None => (0..catalog.len()).collect(),
        Some(pw) => {
            catalog
                .iter()
                .filter(|w| distortion(w, Some(pw), weights) < weights.dhat)
                .map(|w| w.id)
                .collect()
        }
    }
}
