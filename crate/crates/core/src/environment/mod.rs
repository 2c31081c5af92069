//! Interference environments: stochastic cellular coexistence and an
//! adaptive jammer that follows repeated waveforms.
//!
//! Each PRI the loop calls [`Environment::sense`] (start of PRI), then
//! [`Environment::begin_pri`] to obtain the interference actually present
//! while the pulse is out, and finally [`Environment::end_pri`] once the
//! transmitted waveform is known.

mod coexistence;
mod jammer;

pub use coexistence::{BaseStation, Block, CoexistenceParams, CoexistenceState};
pub use jammer::{JammerState, DEFAULT_JNR_DB};

use rand::Rng;

use crate::spectrum::{Catalog, ChannelGrid, InterferenceVector};

#[derive(Debug, Clone)]
pub enum Environment {
    Coexistence(CoexistenceState),
    Jammer(JammerState),
    /// Fixed occupancy with a constant per-sub-channel INR, dB.
    Static { s: InterferenceVector, inr_db: f64 },
}

impl Environment {
    /// Interference vector as of sensing time.
    pub fn sense(&self) -> InterferenceVector {
        match self {
            Environment::Coexistence(c) => c.current(),
            Environment::Jammer(j) => j.current(),
            Environment::Static { s, .. } => *s,
        }
    }

    /// Advances to the interference present during this PRI's transmission.
    pub fn begin_pri<R: Rng + ?Sized>(&mut self, rng: &mut R) -> InterferenceVector {
        match self {
            Environment::Coexistence(c) => c.step(rng),
            Environment::Jammer(j) => j.current(),
            Environment::Static { s, .. } => *s,
        }
    }

    /// Lets the environment react to the transmitted waveform.
    pub fn end_pri(&mut self, catalog: &Catalog, w_t: usize, w_prev: Option<usize>) {
        if let Environment::Jammer(j) = self {
            j.step(catalog, w_t, w_prev);
        }
    }

    /// Per-sub-channel interference-to-noise ratio (linear), where noise is
    /// the receiver noise falling in one sub-channel.
    pub fn subchannel_inr(&self, grid: &ChannelGrid, noise_power_dbm: f64) -> Vec<f64> {
        let per_sub_noise_mw = dbm_to_mw(noise_power_dbm) / grid.subchannels() as f64;
        match self {
            Environment::Coexistence(c) => c
                .subchannel_power_mw()
                .iter()
                .map(|p| p / per_sub_noise_mw)
                .collect(),
            Environment::Jammer(j) => j.subchannel_inr(),
            Environment::Static { s, inr_db } => (0..grid.subchannels())
                .map(|k| if s.get(k) { db_to_lin(*inr_db) } else { 0.0 })
                .collect(),
        }
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::CatalogSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn static_environment_senses_truth() {
        let s = InterferenceVector::from_indices(10, &[2, 3]).unwrap();
        let mut env = Environment::Static { s, inr_db: 20.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let grid = ChannelGrid::new(100e6, 10, -90.0).unwrap();
        let cat = Catalog::from_spec(&grid, &CatalogSpec::default()).unwrap();
        for _ in 0..10 {
            let sensed = env.sense();
            assert_eq!(sensed, env.begin_pri(&mut rng));
            env.end_pri(&cat, 0, Some(0));
        }
        let inr = env.subchannel_inr(&grid, -100.0);
        assert_eq!(inr[2], 100.0);
        assert_eq!(inr[0], 0.0);
    }
}
