use rand::Rng;
use serde::{Deserialize, Serialize};

use super::exp3::Exp3State;
use super::history::ContextVector;
use super::ts::{ts_select, TsState};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    Ts,
    Exp3,
    FixedFullband,
}

impl LearnerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LearnerKind::Ts => "ts",
            LearnerKind::Exp3 => "exp3",
            LearnerKind::FixedFullband => "fixed-fullband",
        }
    }
}

impl std::str::FromStr for LearnerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ts" => Ok(LearnerKind::Ts),
            "exp3" => Ok(LearnerKind::Exp3),
            "fixed-fullband" | "fixed" => Ok(LearnerKind::FixedFullband),
            other => Err(format!("unknown algorithm `{other}` (expected ts, exp3, fixed-fullband)")),
        }
    }
}

/// A waveform-selection policy driven by the per-PRI loop.
#[derive(Debug, Clone)]
pub enum Learner {
    Ts(TsState),
    Exp3 {
        state: Exp3State,
        // distribution used for the pending decision
        last_probs: Vec<f64>,
    },
    Fixed(usize),
}

impl Learner {
    pub fn kind(&self) -> LearnerKind {
        match self {
            Learner::Ts(_) => LearnerKind::Ts,
            Learner::Exp3 { .. } => LearnerKind::Exp3,
            Learner::Fixed(_) => LearnerKind::FixedFullband,
        }
    }

    /// Chooses a position in `contexts`.
    pub fn select<R: Rng + ?Sized>(
        &mut self,
        contexts: &[(usize, ContextVector)],
        rng: &mut R,
    ) -> Result<usize> {
        match self {
            Learner::Ts(st) => {
                let id = ts_select(contexts, st, rng)?;
                Ok(contexts.iter().position(|(i, _)| *i == id).expect("selected from set"))
            }
            Learner::Exp3 { state, last_probs } => {
                let ids: Vec<usize> = contexts.iter().map(|(i, _)| *i).collect();
                *last_probs = state.distribution(&ids);
                Ok(Exp3State::sample(last_probs, rng))
            }
            Learner::Fixed(id) => contexts
                .iter()
                .position(|(i, _)| i == id)
                .ok_or_else(|| crate::Error::Invariant(format!("fixed waveform {id} not admissible"))),
        }
    }

    pub fn update(&mut self, contexts: &[(usize, ContextVector)], chosen: usize, cost: f64) {
        match self {
            Learner::Ts(st) => st.update(&contexts[chosen].1, cost),
            Learner::Exp3 { state, last_probs } => {
                state.update(contexts, last_probs, chosen, cost);
            }
            Learner::Fixed(_) => {}
        }
    }
}
