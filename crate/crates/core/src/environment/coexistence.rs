use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{dbm_to_mw, mw_to_dbm};
use crate::error::{Error, Result};
use crate::spectrum::{ChannelGrid, InterferenceVector};

/// Cellular deployment sharing the channel with the radar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoexistenceParams {
    pub base_stations: usize,
    pub power_dbm: (f64, f64),
    pub distance_m: (f64, f64),
    pub path_loss_exponent: f64,
    pub rx_gain_db: f64,
    /// Mean and standard deviation of the natural-log shadowing `X_j`.
    pub shadow_mean: f64,
    pub shadow_sigma: f64,
    /// Fraction of shadowing variance shared by all base stations.
    pub shadow_correlation: f64,
    /// PRIs per interference block.
    pub coherence_pris: u32,
    pub cell_bandwidth_hz: f64,
}

impl Default for CoexistenceParams {
    fn default() -> Self {
        Self {
            base_stations: 5,
            power_dbm: (40.0, 46.5),
            distance_m: (5000.0, 6000.0),
            path_loss_exponent: 3.5,
            rx_gain_db: 0.0,
            shadow_mean: 0.0,
            shadow_sigma: 2.0,
            shadow_correlation: 0.0,
            coherence_pris: 7,
            cell_bandwidth_hz: 20e6,
        }
    }
}

impl CoexistenceParams {
    pub fn validate(&self, grid: &ChannelGrid) -> Result<()> {
        if self.base_stations == 0 {
            return Err(Error::param("base_stations", "need at least one"));
        }
        if self.coherence_pris == 0 {
            return Err(Error::param("coherence_pris", "must be at least 1"));
        }
        if !(self.power_dbm.0 <= self.power_dbm.1) || !(self.distance_m.0 <= self.distance_m.1) {
            return Err(Error::param("power_dbm/distance_m", "ranges must be ordered"));
        }
        if !(self.distance_m.0 > 0.0) {
            return Err(Error::param("distance_m", "must be positive"));
        }
        if !(self.shadow_sigma >= 0.0) {
            return Err(Error::param("shadow_sigma", "must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.shadow_correlation) {
            return Err(Error::param("shadow_correlation", "must lie in [0, 1]"));
        }
        let width = grid.subchannel_width_hz();
        let span = self.cell_bandwidth_hz / width;
        if !(self.cell_bandwidth_hz > 0.0)
            || (span - span.round()).abs() > 1e-9
            || span.round() as usize > grid.subchannels()
        {
            return Err(Error::param(
                "cell_bandwidth_hz",
                "must be a whole number of sub-channels that fits the channel",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub power_dbm: f64,
    pub distance_m: f64,
}

/// One coherence block: which stations transmit, where, and their shadowing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub active: Vec<bool>,
    /// Lowest sub-channel of each station's cellular band.
    pub band_start: Vec<usize>,
    /// Shadowing draws `X_j` (natural-log units).
    pub shadowing: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CoexistenceState {
    params: CoexistenceParams,
    grid: ChannelGrid,
    stations: Vec<BaseStation>,
    block: Block,
    counter: u32,
    power_mw: Vec<f64>,
    current: InterferenceVector,
}

impl CoexistenceState {
    /// Places stations uniformly in the configured power and distance ranges.
    /// The first call to [`step`](Self::step) opens a fresh block.
    pub fn new<R: Rng + ?Sized>(params: CoexistenceParams, grid: ChannelGrid, rng: &mut R) -> Result<Self> {
        params.validate(&grid)?;
        let stations = (0..params.base_stations)
            .map(|_| BaseStation {
                power_dbm: uniform(rng, params.power_dbm),
                distance_m: uniform(rng, params.distance_m),
            })
            .collect();
        Self::with_stations(params, grid, stations, rng)
    }

    pub fn with_stations<R: Rng + ?Sized>(
        params: CoexistenceParams,
        grid: ChannelGrid,
        stations: Vec<BaseStation>,
        rng: &mut R,
    ) -> Result<Self> {
        params.validate(&grid)?;
        if stations.len() != params.base_stations {
            return Err(Error::param("stations", "count must equal base_stations"));
        }
        let mut st = Self {
            params,
            grid,
            stations,
            block: Block {
                active: Vec::new(),
                band_start: Vec::new(),
                shadowing: Vec::new(),
            },
            counter: 1,
            power_mw: Vec::new(),
            current: InterferenceVector::empty(grid.subchannels()),
        };
        let block = st.draw_block(rng);
        st.set_block(block, 1);
        Ok(st)
    }

    pub fn params(&self) -> &CoexistenceParams {
        &self.params
    }

    pub fn stations(&self) -> &[BaseStation] {
        &self.stations
    }

    pub fn block(&self) -> &Block {
        &self.block
    }

    /// PRIs left in the current block, in `[1, coherence_pris]`.
    pub fn counter(&self) -> u32 {
        self.counter
    }

    pub fn current(&self) -> InterferenceVector {
        self.current
    }

    pub fn active_count(&self) -> usize {
        self.block.active.iter().filter(|a| **a).count()
    }

    /// Aggregate interference power per sub-channel, mW.
    pub fn subchannel_power_mw(&self) -> &[f64] {
        &self.power_mw
    }

    fn cell_span(&self) -> usize {
        (self.params.cell_bandwidth_hz / self.grid.subchannel_width_hz()).round() as usize
    }

    /// Received power of station `j` under shadowing draw `x`, dBm.
    pub fn received_power_dbm(&self, j: usize, x: f64) -> f64 {
        let bs = &self.stations[j];
        bs.power_dbm + self.params.rx_gain_db
            - 10.0 * self.params.path_loss_exponent * bs.distance_m.log10()
            + 10.0 * std::f64::consts::E.log10() * x
    }

    fn draw_block<R: Rng + ?Sized>(&self, rng: &mut R) -> Block {
        let n = self.params.base_stations;
        let n_act = rng.random_range(1..=n);
        let mut active = vec![false; n];
        for j in index::sample(rng, n, n_act) {
            active[j] = true;
        }
        let max_start = self.grid.subchannels() - self.cell_span();
        let band_start = (0..n).map(|_| rng.random_range(0..=max_start)).collect();
        let rho = self.params.shadow_correlation;
        let common: f64 = rng.sample(StandardNormal);
        let shadowing = (0..n)
            .map(|_| {
                let own: f64 = rng.sample(StandardNormal);
                let z = rho.sqrt() * common + (1.0 - rho).sqrt() * own;
                self.params.shadow_mean + self.params.shadow_sigma * z
            })
            .collect();
        Block {
            active,
            band_start,
            shadowing,
        }
    }

    /// Installs `block` with `counter` PRIs remaining and recomputes occupancy.
    pub fn set_block(&mut self, block: Block, counter: u32) {
        let n = self.params.base_stations;
        assert!(block.active.len() == n && block.band_start.len() == n && block.shadowing.len() == n);
        assert!((1..=self.params.coherence_pris).contains(&counter) || counter == 1);
        let s = self.grid.subchannels();
        let span = self.cell_span();
        let mut power = vec![0.0; s];
        for j in 0..n {
            if !block.active[j] {
                continue;
            }
            let p = dbm_to_mw(self.received_power_dbm(j, block.shadowing[j]));
            let start = block.band_start[j];
            for slot in power.iter_mut().skip(start).take(span) {
                *slot += p;
            }
        }
        let h = self.grid.harmful_threshold_dbm();
        let mut v = InterferenceVector::empty(s);
        for (k, p) in power.iter().enumerate() {
            if *p > 0.0 && mw_to_dbm(*p) > h {
                v.set(k, true);
            }
        }
        self.block = block;
        self.counter = counter;
        self.power_mw = power;
        self.current = v;
    }

    /// Advances one PRI, opening a new block when the current one expires.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> InterferenceVector {
        if self.counter <= 1 {
            let block = self.draw_block(rng);
            self.set_block(block, self.params.coherence_pris);
        } else {
            self.counter -= 1;
        }
        self.current
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> ChannelGrid {
        ChannelGrid::new(100e6, 10, -90.0).unwrap()
    }

    fn single_station(rng: &mut ChaCha8Rng) -> CoexistenceState {
        let params = CoexistenceParams {
            base_stations: 1,
            ..Default::default()
        };
        let bs = BaseStation {
            power_dbm: 40.0,
            distance_m: 5000.0,
        };
        CoexistenceState::with_stations(params, grid(), vec![bs], rng).unwrap()
    }

    #[test]
    fn eq16_single_station_by_hand() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut st = single_station(&mut rng);
        let p = st.received_power_dbm(0, 0.0);
        assert!((p - (40.0 - 35.0 * 5000f64.log10())).abs() < 1e-12);
        assert!((p + 89.47).abs() < 0.01);
        st.set_block(
            Block {
                active: vec![true],
                band_start: vec![3],
                shadowing: vec![0.0],
            },
            7,
        );
        // -89.47 dBm exceeds H = -90 dBm on both covered sub-channels
        assert_eq!(st.current().to_string(), "0001100000");
        // exp(X) with X = -1 knocks it below threshold
        st.set_block(
            Block {
                active: vec![true],
                band_start: vec![3],
                shadowing: vec![-1.0],
            },
            7,
        );
        assert!(st.current().is_empty());
    }

    #[test]
    fn no_active_stations_means_no_interference() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut st = CoexistenceState::new(CoexistenceParams::default(), grid(), &mut rng).unwrap();
        st.set_block(
            Block {
                active: vec![false; 5],
                band_start: vec![0; 5],
                shadowing: vec![3.0; 5],
            },
            1,
        );
        assert!(st.current().is_empty());
        assert!(st.subchannel_power_mw().iter().all(|p| *p == 0.0));
    }

    #[test]
    fn blocks_hold_for_coherence_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut st = CoexistenceState::new(CoexistenceParams::default(), grid(), &mut rng).unwrap();
        let seq: Vec<_> = (0..700).map(|_| st.step(&mut rng)).collect();
        for block in seq.chunks(7) {
            assert!(block.iter().all(|s| *s == block[0]));
        }
        for _ in 0..100 {
            st.step(&mut rng);
            assert!((1..=7).contains(&st.counter()));
            assert!(st.active_count() >= 1 && st.active_count() <= 5);
        }
    }

    #[test]
    fn sensing_across_a_block_boundary_is_stale() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut st = CoexistenceState::new(CoexistenceParams::default(), grid(), &mut rng).unwrap();
        st.step(&mut rng);
        // walk forward until a block boundary changes the vector
        loop {
            let sensed = st.current();
            let last = st.counter() == 1;
            let truth = st.step(&mut rng);
            if last {
                let expected = st.current();
                assert_eq!(truth, expected);
                if truth != sensed {
                    break;
                }
            } else {
                assert_eq!(sensed, truth);
            }
        }
    }

    #[test]
    fn station_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let st = CoexistenceState::new(CoexistenceParams::default(), grid(), &mut rng).unwrap();
        for bs in st.stations() {
            assert!((5000.0..=6000.0).contains(&bs.distance_m));
            assert!((40.0..=46.5).contains(&bs.power_dbm));
        }
    }

    #[test]
    fn seeded_reproducibility() {
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut st = CoexistenceState::new(CoexistenceParams::default(), grid(), &mut rng).unwrap();
            (0..200).map(|_| st.step(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn rejects_bad_params() {
        let g = grid();
        let bad = CoexistenceParams {
            cell_bandwidth_hz: 15e6,
            ..Default::default()
        };
        assert!(bad.validate(&g).is_err());
        let bad = CoexistenceParams {
            coherence_pris: 0,
            ..Default::default()
        };
        assert!(bad.validate(&g).is_err());
    }
}
