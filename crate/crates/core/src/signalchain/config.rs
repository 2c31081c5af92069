use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{ChannelGrid, Waveform};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Coherent processing interval parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CpiConfig {
    /// Pulses per CPI.
    pub pulses: usize,
    pub pri_s: f64,
    /// Complex baseband sample rate, Hz.
    pub fs_hz: f64,
    pub carrier_hz: f64,
    /// Receiver noise power over the sampled band, dBm. Samples are scaled
    /// so this power is unit variance. The default puts the per-sub-channel
    /// noise at the harmful-interference threshold.
    pub noise_power_dbm: f64,
    pub noise_enabled: bool,
    /// Fast-time samples per PRI.
    pub fast_samples: usize,
    /// First fast-time lag kept after pulse compression.
    pub range_gate_start: usize,
    /// Range bins kept after pulse compression.
    pub range_bins: usize,
}

impl Default for CpiConfig {
    fn default() -> Self {
        Self {
            pulses: 400,
            pri_s: 1.024e-4,
            fs_hz: 100e6,
            carrier_hz: 3e9,
            noise_power_dbm: -80.0,
            noise_enabled: true,
            fast_samples: 10240,
            range_gate_start: 2000,
            range_bins: 256,
        }
    }
}

impl CpiConfig {
    pub fn validate(&self, grid: &ChannelGrid) -> Result<()> {
        if self.pulses == 0 {
            return Err(Error::param("pulses", "need at least one pulse per CPI"));
        }
        if !(self.pri_s > 0.0) {
            return Err(Error::param("pri_s", "must be positive"));
        }
        if self.fs_hz < grid.bandwidth_hz() {
            return Err(Error::param("fs_hz", "sample rate must cover the shared channel"));
        }
        if !(self.carrier_hz > 0.0) {
            return Err(Error::param("carrier_hz", "must be positive"));
        }
        if self.range_bins == 0 || self.range_gate_start + self.range_bins > self.fast_samples {
            return Err(Error::param("range_bins", "range gate must lie inside the PRI"));
        }
        let pri_samples = (self.pri_s * self.fs_hz).round() as usize;
        if self.fast_samples > pri_samples {
            return Err(Error::param("fast_samples", "longer than one PRI"));
        }
        Ok(())
    }

    pub fn meters_per_range_bin(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.fs_hz)
    }

    pub fn hz_per_doppler_bin(&self) -> f64 {
        1.0 / (self.pulses as f64 * self.pri_s)
    }

    /// Row holding zero Doppler.
    pub fn zero_doppler_row(&self) -> usize {
        self.pulses / 2
    }

    /// Fast-time span `[start, start + len)` needed to pulse-compress the
    /// range gate for the longest pulse in `sequence`.
    pub fn gate_window(&self, sequence: &[Waveform]) -> (usize, usize) {
        let longest = sequence
            .iter()
            .map(|w| super::pulse_len(w, self.fs_hz))
            .max()
            .unwrap_or(0);
        let start = self.range_gate_start;
        let len = (self.range_bins + longest).min(self.fast_samples - start);
        (start, len)
    }
}

/// Point target. `snr_db` is the per-pulse SNR after pulse compression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub range_m: f64,
    pub velocity_mps: f64,
    pub snr_db: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

impl Target {
    pub fn new(range_m: f64, velocity_mps: f64, snr_db: f64) -> Self {
        Self {
            range_m,
            velocity_mps,
            snr_db,
            phase_rad: 0.0,
        }
    }

    pub fn delay_s(&self) -> f64 {
        2.0 * self.range_m / SPEED_OF_LIGHT
    }

    /// Round-trip Doppler shift, Hz (positive = closing).
    pub fn doppler_hz(&self, carrier_hz: f64) -> f64 {
        2.0 * self.velocity_mps * carrier_hz / SPEED_OF_LIGHT
    }

    /// `(doppler row, range column)` in the map, or `None` when the target
    /// lies outside the range gate.
    pub fn expected_cell(&self, cfg: &CpiConfig) -> Option<(usize, usize)> {
        let lag = (self.delay_s() * cfg.fs_hz).round() as i64 - cfg.range_gate_start as i64;
        if lag < 0 || lag >= cfg.range_bins as i64 {
            return None;
        }
        let m = cfg.pulses as i64;
        let k = (self.doppler_hz(cfg.carrier_hz) * cfg.pulses as f64 * cfg.pri_s).round() as i64;
        let row = (k + m / 2).rem_euclid(m) as usize;
        Some((row, lag as usize))
    }

    pub fn validate(&self, cfg: &CpiConfig) -> Result<()> {
        let r_max = SPEED_OF_LIGHT * cfg.pri_s / 2.0;
        if !(self.range_m > 0.0 && self.range_m < r_max) {
            return Err(Error::param("target.range_m", format!("outside (0, {r_max}) m")));
        }
        let v_max = SPEED_OF_LIGHT / (4.0 * cfg.carrier_hz * cfg.pri_s);
        if self.velocity_mps.abs() >= v_max {
            return Err(Error::param("target.velocity_mps", format!("beyond ±{v_max} m/s")));
        }
        Ok(())
    }
}
