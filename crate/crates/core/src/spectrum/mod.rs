//! Waveform catalog, shared-channel grid and the radar cost model.

mod catalog;
mod cost;
mod grid;

pub use catalog::{build_catalog, Catalog, CatalogSpec, Waveform};
pub use cost::{
    collision_bw, cost, distortion, lipschitz_metric, missed_bw, CostBreakdown, CostModel,
    CostWeights,
};
pub use grid::{ChannelGrid, InterferenceVector, MAX_SUBCHANNELS};

/// Default shared-channel width, Hz.
pub const DEFAULT_CHANNEL_BW_HZ: f64 = 100e6;
/// Default number of sub-channels.
pub const DEFAULT_SUBCHANNELS: usize = 10;
/// Default harmful-interference threshold, dBm.
pub const DEFAULT_HARMFUL_THRESHOLD_DBM: f64 = -90.0;
/// Default pulse duration: 10% duty cycle of a 0.1024 ms PRI.
pub const DEFAULT_PULSE_DURATION_S: f64 = 10.24e-6;
