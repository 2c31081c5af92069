use std::io::Write;

use serde::{Deserialize, Serialize};

use super::grid::ChannelGrid;
use crate::error::{Error, Result};

/// One LFM up-chirp. The chirp slope is `bw_hz / duration_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub id: usize,
    pub fc_hz: f64,
    pub bw_hz: f64,
    pub duration_s: f64,
    pub amplitude: f64,
}

impl Waveform {
    /// Chirp rate, Hz/s.
    pub fn slope(&self) -> f64 {
        self.bw_hz / self.duration_s
    }

    /// Occupied band `[fc - bw/2, fc + bw/2]`.
    pub fn band(&self) -> (f64, f64) {
        (self.fc_hz - self.bw_hz / 2.0, self.fc_hz + self.bw_hz / 2.0)
    }

    fn validate(&self, grid: &ChannelGrid) -> Result<()> {
        if !(self.bw_hz > 0.0 && self.duration_s > 0.0 && self.amplitude > 0.0) {
            return Err(Error::param(
                "waveform",
                format!("waveform {} needs bw, T, A > 0", self.id),
            ));
        }
        let (lo, hi) = self.band();
        if !grid.contains(lo, hi) {
            return Err(Error::param(
                "waveform",
                format!("waveform {} band [{lo}, {hi}] Hz leaves the channel", self.id),
            ));
        }
        Ok(())
    }
}

/// Parameters of a gridded catalog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatalogSpec {
    pub bw_min_hz: f64,
    pub bw_max_hz: f64,
    pub step_hz: f64,
    pub duration_s: f64,
    pub amplitude: f64,
}

impl Default for CatalogSpec {
    fn default() -> Self {
        Self {
            bw_min_hz: 10e6,
            bw_max_hz: 100e6,
            step_hz: 10e6,
            duration_s: super::DEFAULT_PULSE_DURATION_S,
            amplitude: 1.0,
        }
    }
}

/// The finite action set, with each waveform's sub-channel footprint cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    grid: ChannelGrid,
    waveforms: Vec<Waveform>,
    masks: Vec<u64>,
}

/// Every chirp on the `step` grid whose band fits in the channel, ordered by
/// bandwidth then center frequency.
pub fn build_catalog(
    grid: &ChannelGrid,
    bw_min: f64,
    bw_max: f64,
    step: f64,
    duration_s: f64,
    amplitude: f64,
) -> Result<Catalog> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidRange(format!("step must be positive, got {step}")));
    }
    if !(bw_min <= bw_max) {
        return Err(Error::InvalidRange(format!(
            "bw_min {bw_min} exceeds bw_max {bw_max}"
        )));
    }
    let span = (bw_max - bw_min) / step;
    if (span - span.round()).abs() > 1e-9 {
        return Err(Error::InvalidRange(format!(
            "step {step} does not divide the bandwidth range"
        )));
    }
    let channel = grid.bandwidth_hz();
    let mut waveforms = Vec::new();
    for k in 0..=span.round() as usize {
        let bw = bw_min + k as f64 * step;
        if bw > channel + 1e-6 {
            return Err(Error::InvalidRange(format!(
                "bandwidth {bw} Hz exceeds the channel"
            )));
        }
        // centers from -(B - bw)/2 upward in `step` increments
        let slack = (channel - bw) / 2.0;
        let n_fc = ((2.0 * slack) / step + 1e-9).floor() as usize + 1;
        for i in 0..n_fc {
            let fc = -slack + i as f64 * step;
            waveforms.push(Waveform {
                id: waveforms.len(),
                fc_hz: fc,
                bw_hz: bw,
                duration_s,
                amplitude,
            });
        }
    }
    Catalog::new(*grid, waveforms)
}

impl Catalog {
    /// Wraps an explicit waveform list. Ids must equal positions.
    pub fn new(grid: ChannelGrid, waveforms: Vec<Waveform>) -> Result<Self> {
        if waveforms.is_empty() {
            return Err(Error::param("catalog", "empty catalog"));
        }
        for (i, w) in waveforms.iter().enumerate() {
            if w.id != i {
                return Err(Error::param("catalog", format!("waveform at {i} has id {}", w.id)));
            }
            w.validate(&grid)?;
        }
        let masks = waveforms
            .iter()
            .map(|w| {
                let (lo, hi) = w.band();
                grid.occupancy_mask(lo, hi)
            })
            .collect();
        Ok(Self {
            grid,
            waveforms,
            masks,
        })
    }

    pub fn from_spec(grid: &ChannelGrid, spec: &CatalogSpec) -> Result<Self> {
        build_catalog(
            grid,
            spec.bw_min_hz,
            spec.bw_max_hz,
            spec.step_hz,
            spec.duration_s,
            spec.amplitude,
        )
    }

    pub fn grid(&self) -> &ChannelGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.waveforms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waveforms.is_empty()
    }

    pub fn get(&self, id: usize) -> &Waveform {
        &self.waveforms[id]
    }

    pub fn waveforms(&self) -> &[Waveform] {
        &self.waveforms
    }

    pub fn iter(&self) -> impl Iterator<Item = &Waveform> {
        self.waveforms.iter()
    }

    /// Sub-channel footprint of waveform `id`.
    pub fn mask(&self, id: usize) -> u64 {
        self.masks[id]
    }

    /// Widest waveform, lowest id on ties (the full-band chirp on the default grid).
    pub fn widest(&self) -> usize {
        let mut best = 0;
        for (i, w) in self.waveforms.iter().enumerate() {
            if w.bw_hz > self.waveforms[best].bw_hz {
                best = i;
            }
        }
        best
    }

    pub fn find(&self, fc_hz: f64, bw_hz: f64) -> Option<usize> {
        self.waveforms
            .iter()
            .position(|w| (w.fc_hz - fc_hz).abs() < 1.0 && (w.bw_hz - bw_hz).abs() < 1.0)
    }

    /// Writes `id,fc_hz,bw_hz,duration_s,amplitude` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["id", "fc_hz", "bw_hz", "duration_s", "amplitude"])?;
        for w in &self.waveforms {
            wtr.write_record(&[
                w.id.to_string(),
                w.fc_hz.to_string(),
                w.bw_hz.to_string(),
                w.duration_s.to_string(),
                w.amplitude.to_string(),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("<catalog csv>", e))?;
        Ok(())
    }
}
