use serde::{Deserialize, Serialize};

use super::db_to_lin;
use crate::spectrum::{Catalog, ChannelGrid, InterferenceVector};

pub const DEFAULT_JNR_DB: f64 = 20.0;

/// Frequency-agile jammer: after the radar repeats a waveform it parks on
/// that waveform's band for the next PRI; otherwise it stays put.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JammerState {
    subchannels: usize,
    band: u64,
    jnr_db: f64,
    last_seen: Option<usize>,
}

impl JammerState {
    /// Starts with an empty jam band.
    pub fn new(grid: &ChannelGrid, jnr_db: f64) -> Self {
        Self {
            subchannels: grid.subchannels(),
            band: 0,
            jnr_db,
            last_seen: None,
        }
    }

    pub fn jnr_db(&self) -> f64 {
        self.jnr_db
    }

    pub fn last_seen(&self) -> Option<usize> {
        self.last_seen
    }

    pub fn band_mask(&self) -> u64 {
        self.band
    }

    pub fn current(&self) -> InterferenceVector {
        InterferenceVector::from_bits(self.band, self.subchannels).expect("mask fits grid")
    }

    /// Observes the radar's transmission and returns next PRI's interference.
    pub fn step(&mut self, catalog: &Catalog, w_t: usize, w_prev: Option<usize>) -> InterferenceVector {
        if w_prev == Some(w_t) {
            self.band = catalog.mask(w_t);
        }
        self.last_seen = Some(w_t);
        self.current()
    }

    pub fn subchannel_inr(&self) -> Vec<f64> {
        let jnr = db_to_lin(self.jnr_db);
        (0..self.subchannels)
            .map(|k| if self.band >> k & 1 == 1 { jnr } else { 0.0 })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{collision_bw, CatalogSpec};

    fn catalog() -> Catalog {
        let grid = ChannelGrid::new(100e6, 10, -90.0).unwrap();
        Catalog::from_spec(&grid, &CatalogSpec::default()).unwrap()
    }

    #[test]
    fn starts_empty() {
        let cat = catalog();
        assert!(JammerState::new(cat.grid(), 20.0).current().is_empty());
    }

    #[test]
    fn repeat_is_jammed_next_pri() {
        let cat = catalog();
        let mut j = JammerState::new(cat.grid(), 20.0);
        let w = cat.find(0.0, 20e6).unwrap();
        let next = j.step(&cat, w, Some(w));
        assert_eq!(next.occupied().collect::<Vec<_>>(), vec![4, 5]);
        let other = cat.find(-40e6, 20e6).unwrap();
        assert_eq!(j.step(&cat, other, Some(w)), next);
        assert_eq!(j.subchannel_inr()[4], 100.0);
    }

    #[test]
    fn transition_table_exhaustive() {
        let cat = catalog();
        let starts = [0u64, cat.mask(0), cat.mask(cat.widest()), cat.mask(20)];
        for &start in &starts {
            for a in 0..cat.len() {
                for b in 0..cat.len() {
                    let mut j = JammerState::new(cat.grid(), 20.0);
                    j.band = start;
                    let next = j.step(&cat, a, Some(b));
                    let expected = if a == b { cat.mask(a) } else { start };
                    assert_eq!(next.bits(), expected);
                }
            }
        }
    }

    #[test]
    fn repeating_policy_is_punished_from_third_pri() {
        let cat = catalog();
        for w in 0..cat.len() {
            let mut j = JammerState::new(cat.grid(), 20.0);
            let mut prev = None;
            for t in 1..=6 {
                let s = j.current();
                let c = collision_bw(cat.get(w), &s, cat.grid());
                if t >= 3 {
                    assert!(c > 0.0, "waveform {w} unjammed at PRI {t}");
                }
                j.step(&cat, w, prev);
                prev = Some(w);
            }
        }
    }
}
