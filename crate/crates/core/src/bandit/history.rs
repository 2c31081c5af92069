use std::collections::HashMap;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::spectrum::InterferenceVector;

/// Features of one (waveform, sensed interference) pair: sample mean of the
/// observed costs, their sample variance and the most recent cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContextVector(pub Vector3<f64>);

impl ContextVector {
    pub const ZERO: ContextVector = ContextVector(Vector3::new(0.0, 0.0, 0.0));

    pub fn new(mean: f64, variance: f64, last: f64) -> Self {
        Self(Vector3::new(mean, variance, last))
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn mean(&self) -> f64 {
        self.0[0]
    }

    pub fn variance(&self) -> f64 {
        self.0[1]
    }

    pub fn last(&self) -> f64 {
        self.0[2]
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }
}

/// Running statistics (Welford) for one pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
    pub last: f64,
}

impl PairStats {
    fn push(&mut self, c: f64) {
        self.count += 1;
        let delta = c - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (c - self.mean);
        self.last = c;
    }

    /// Sample variance with the `n - 1` denominator; zero below two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub t: u64,
    pub s_hat: InterferenceVector,
    pub s_true: InterferenceVector,
    pub waveform: usize,
    pub cost: f64,
}

/// Everything the radar remembers: an append-only log plus per-pair
/// statistics keyed by (waveform, sensed vector).
#[derive(Debug, Clone, Default)]
pub struct ObservationHistory {
    stats: HashMap<(usize, InterferenceVector), PairStats>,
    log: Vec<HistoryEntry>,
}

impl ObservationHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(
        &mut self,
        t: u64,
        s_hat: InterferenceVector,
        s_true: InterferenceVector,
        waveform: usize,
        cost: f64,
    ) {
        self.stats.entry((waveform, s_hat)).or_default().push(cost);
        self.log.push(HistoryEntry {
            t,
            s_hat,
            s_true,
            waveform,
            cost,
        });
    }

    pub fn stats(&self, waveform: usize, s_hat: &InterferenceVector) -> Option<&PairStats> {
        self.stats.get(&(waveform, *s_hat))
    }

    pub fn count(&self, waveform: usize, s_hat: &InterferenceVector) -> u64 {
        self.stats(waveform, s_hat).map_or(0, |s| s.count)
    }

    pub fn log(&self) -> &[HistoryEntry] {
        &self.log
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&(usize, InterferenceVector), &PairStats)> {
        self.stats.iter()
    }

    pub fn len(&self) -> usize {
        self.log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log.is_empty()
    }

    pub fn context(&self, waveform: usize, s_hat: &InterferenceVector) -> ContextVector {
        build_context(waveform, s_hat, self)
    }
}

/// Context for `waveform` under sensed vector `s_hat`. Unseen pairs map to the
/// zero vector.
pub fn build_context(
    waveform: usize,
    s_hat: &InterferenceVector,
    hist: &ObservationHistory,
) -> ContextVector {
    match hist.stats(waveform, s_hat) {
        None => ContextVector::ZERO,
        Some(st) => ContextVector::new(st.mean, st.variance(), st.last),
    }
}
