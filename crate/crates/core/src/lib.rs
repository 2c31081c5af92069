//! Online waveform selection for a pulse-agile cognitive radar.
//!
//! The radar picks one LFM chirp per pulse repetition interval (PRI) from a
//! finite catalog, using a contextual bandit (linear Thompson sampling or
//! linear EXP3) whose action set is pruned so that consecutive pulses never
//! differ by more than a tolerable distortion. The crate also carries the two
//! interference environments used to exercise the learners and a complete
//! pulse-Doppler receive chain (matched filter, range-Doppler FFT, 2D CA-CFAR)
//! for scoring detection performance.
//!
//! Module map:
//!
//! * [`spectrum`]: waveform catalog, channel grid, cost model.
//! * [`bandit`]: observation history, contexts, TS / EXP3 policies, regret.
//! * [`environment`]: coexistence and adaptive-jammer interference.
//! * [`signalchain`]: CPI synthesis, matched filtering, range-Doppler, CFAR, ROC.
//! * [`harness`]: experiment configuration, the per-PRI loop, artifacts, CLI.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandit;
pub mod environment;
pub mod error;
pub mod harness;
pub mod signalchain;
pub mod spectrum;

pub use error::{Error, Result};
