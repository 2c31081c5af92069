//! Pulse-Doppler receive chain used to score waveform policies.
//!
//! Fast time is sampled at complex baseband; each slow-time row holds one
//! pulse repetition interval. Rows are pulse-compressed against their own
//! transmitted chirp, then transformed across slow time into a
//! Doppler-centered range-Doppler map that is thresholded by a 2D CA-CFAR.

mod cfar;
mod config;
mod dump;
mod matched;
mod pulse;
mod scoring;
mod simulate;

pub use cfar::{cfar_2d, threshold_factor, CfarDetector, CfarWindow, DetectionReport};
pub use config::{CpiConfig, Target, SPEED_OF_LIGHT};
pub use dump::{header_path, read_map_dump, write_map_dump, MapHeader, DUMP_FORMAT};
pub use matched::{matched_filter, range_doppler, RangeDopplerMap, RangeProfiles};
pub use pulse::{echo_sample, pulse_len, synth_pulse};
pub use scoring::{
    off_target_doppler_energy, roc_curve, score_detections, DetectionScore, RocPoint, Tolerance,
};
pub use simulate::{simulate_cpi, simulate_window, RawCpi};

use rand::Rng;

use crate::error::Result;
use crate::spectrum::{ChannelGrid, Waveform};

/// Detection results for one CPI at each requested false-alarm rate.
#[derive(Debug, Clone)]
pub struct CpiOutcome {
    pub scores: Vec<DetectionScore>,
    pub map: Option<RangeDopplerMap>,
}

/// Runs one CPI end to end: synthesis over the range gate, per-pulse
/// matched filtering, slow-time FFT, CFAR at each `pfas` entry and scoring.
#[allow(clippy::too_many_arguments)]
pub fn process_cpi<R: Rng + ?Sized>(
    sequence: &[Waveform],
    targets: &[Target],
    interference: &[Vec<f64>],
    cfg: &CpiConfig,
    grid: &ChannelGrid,
    window: &CfarWindow,
    pfas: &[f64],
    tolerance: Tolerance,
    keep_map: bool,
    rng: &mut R,
) -> Result<CpiOutcome> {
    let raw = simulate_window(sequence, targets, interference, cfg, grid, cfg.gate_window(sequence), rng)?;
    let profiles = matched_filter(&raw, sequence, cfg)?;
    let map = range_doppler(&profiles, cfg);
    let detector = CfarDetector::new(map.power(), map.rows(), map.cols(), window)?;
    let cells: Vec<_> = targets.iter().map(|t| t.expected_cell(cfg)).collect();
    let scores = pfas
        .iter()
        .map(|&pfa| {
            let report = detector.detect(pfa)?;
            Ok(score_detections(&report, &cells, tolerance))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CpiOutcome {
        scores,
        map: keep_map.then_some(map),
    })
}
