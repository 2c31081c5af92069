use std::collections::HashMap;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::config::CpiConfig;
use super::pulse::synth_pulse;
use super::simulate::RawCpi;
use crate::error::{Error, Result};
use crate::spectrum::Waveform;

/// Pulse-compressed slow-time × range matrix over the range gate.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeProfiles {
    pub rows: usize,
    pub cols: usize,
    pub gate_start: usize,
    pub data: Vec<Complex64>,
}

impl RangeProfiles {
    pub fn row(&self, m: usize) -> &[Complex64] {
        &self.data[m * self.cols..(m + 1) * self.cols]
    }
}

/// Correlates each row with its own transmitted pulse and keeps the lags of
/// the configured range gate. Lag `k` holds `Σ y[n] p*[n - k]`, so a
/// noise-free echo peaks at its delay bin with value `E · |g|`.
pub fn matched_filter(raw: &RawCpi, sequence: &[Waveform], cfg: &CpiConfig) -> Result<RangeProfiles> {
    if sequence.len() != raw.rows {
        return Err(Error::param("sequence", "one waveform per raw row required"));
    }
    if raw.start > cfg.range_gate_start {
        return Err(Error::param("raw", "record starts after the range gate"));
    }
    let lag0 = cfg.range_gate_start - raw.start;
    let bins = cfg.range_bins;
    let longest = sequence
        .iter()
        .map(|w| super::pulse_len(w, cfg.fs_hz))
        .max()
        .unwrap_or(0);
    let nfft = (raw.cols.max(lag0 + bins) + longest).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(nfft);
    let inv = planner.plan_fft_inverse(nfft);

    let mut replicas: HashMap<usize, Vec<Complex64>> = HashMap::new();
    let mut out = vec![Complex64::new(0.0, 0.0); raw.rows * bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    let scale = 1.0 / nfft as f64;

    for (m, w) in sequence.iter().enumerate() {
        if let std::collections::hash_map::Entry::Vacant(slot) = replicas.entry(w.id) {
            let mut p = synth_pulse(w, cfg.fs_hz)?;
            p.resize(nfft, Complex64::new(0.0, 0.0));
            fwd.process(&mut p);
            slot.insert(p);
        }
        let spec = &replicas[&w.id];
        buf[..raw.cols].copy_from_slice(raw.row(m));
        buf[raw.cols..].fill(Complex64::new(0.0, 0.0));
        fwd.process(&mut buf);
        for (y, p) in buf.iter_mut().zip(spec) {
            *y *= p.conj();
        }
        inv.process(&mut buf);
        for (o, r) in out[m * bins..(m + 1) * bins].iter_mut().zip(&buf[lag0..lag0 + bins]) {
            *o = r * scale;
        }
    }
    Ok(RangeProfiles {
        rows: raw.rows,
        cols: bins,
        gate_start: cfg.range_gate_start,
        data: out,
    })
}

/// Doppler × range map. Row `pulses / 2` is zero Doppler.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDopplerMap {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
    power: Vec<f64>,
    pub meters_per_range_bin: f64,
    pub hz_per_doppler_bin: f64,
    pub gate_start: usize,
}

impl RangeDopplerMap {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// `|X|²`, row-major.
    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    pub fn power_at(&self, row: usize, col: usize) -> f64 {
        self.power[row * self.cols + col]
    }

    pub fn total_energy(&self) -> f64 {
        self.power.iter().sum()
    }
}

/// Unitary FFT across slow time for every range bin, Doppler-centered.
pub fn range_doppler(profiles: &RangeProfiles, cfg: &CpiConfig) -> RangeDopplerMap {
    let (m, n) = (profiles.rows, profiles.cols);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(m);
    let scale = 1.0 / (m as f64).sqrt();
    let half = m / 2;
    let mut data = vec![Complex64::new(0.0, 0.0); m * n];
    let mut col = vec![Complex64::new(0.0, 0.0); m];
    for c in 0..n {
        for (r, x) in col.iter_mut().enumerate() {
            *x = profiles.data[r * n + c];
        }
        fft.process(&mut col);
        for (k, x) in col.iter().enumerate() {
            let row = (k + half) % m;
            data[row * n + c] = x * scale;
        }
    }
    let power = data.iter().map(|x| x.norm_sqr()).collect();
    RangeDopplerMap {
        rows: m,
        cols: n,
        data,
        power,
        meters_per_range_bin: cfg.meters_per_range_bin(),
        hz_per_doppler_bin: 1.0 / (m as f64 * cfg.pri_s),
        gate_start: profiles.gate_start,
    }
}
