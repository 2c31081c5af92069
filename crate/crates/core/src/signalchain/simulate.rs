use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use super::config::{CpiConfig, Target};
use super::pulse::{echo_sample, pulse_len};
use crate::error::{Error, Result};
use crate::spectrum::{ChannelGrid, Waveform};

/// Received fast-time samples, one row per pulse, covering fast-time
/// samples `[start, start + cols)` of each PRI.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCpi {
    pub rows: usize,
    pub cols: usize,
    pub start: usize,
    pub data: Vec<Complex64>,
}

impl RawCpi {
    pub fn row(&self, m: usize) -> &[Complex64] {
        &self.data[m * self.cols..(m + 1) * self.cols]
    }
}

/// Full-PRI simulation: `pulses × fast_samples`.
pub fn simulate_cpi<R: Rng + ?Sized>(
    sequence: &[Waveform],
    targets: &[Target],
    interference: &[Vec<f64>],
    cfg: &CpiConfig,
    grid: &ChannelGrid,
    rng: &mut R,
) -> Result<RawCpi> {
    simulate_window(sequence, targets, interference, cfg, grid, (0, cfg.fast_samples), rng)
}

/// Simulates only fast-time samples `[start, start + len)` of each PRI.
///
/// Each row is the sum of the target echoes (true fractional delay, slow-time
/// Doppler progression), band-limited Gaussian interference with per
/// sub-channel INR taken from `interference[m]` (empty slice: none), and unit
/// variance circular white noise.
pub fn simulate_window<R: Rng + ?Sized>(
    sequence: &[Waveform],
    targets: &[Target],
    interference: &[Vec<f64>],
    cfg: &CpiConfig,
    grid: &ChannelGrid,
    (start, len): (usize, usize),
    rng: &mut R,
) -> Result<RawCpi> {
    if sequence.len() != cfg.pulses {
        return Err(Error::param(
            "sequence",
            format!("{} waveforms for a {}-pulse CPI", sequence.len(), cfg.pulses),
        ));
    }
    if !interference.is_empty() && interference.len() != cfg.pulses {
        return Err(Error::param("interference", "one INR row per pulse required"));
    }
    if interference.iter().any(|row| row.len() != grid.subchannels()) {
        return Err(Error::param("interference", "INR rows must have one entry per sub-channel"));
    }
    if start + len > cfg.fast_samples {
        return Err(Error::param("window", "extends past the fast-time record"));
    }
    let fs = cfg.fs_hz;
    let mut data = vec![Complex64::new(0.0, 0.0); cfg.pulses * len];
    let mut planner = FftPlanner::<f64>::new();
    let ifft = planner.plan_fft_inverse(len);
    let bin_subchannel = subchannel_of_bins(len, fs, grid);
    let mut spectrum = vec![Complex64::new(0.0, 0.0); len];

    for (m, w) in sequence.iter().enumerate() {
        let row = &mut data[m * len..(m + 1) * len];

        if cfg.noise_enabled {
            let sd = std::f64::consts::FRAC_1_SQRT_2;
            for x in row.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *x = Complex64::new(sd * re, sd * im);
            }
        }

        if let Some(inr) = interference.get(m).filter(|r| r.iter().any(|v| *v > 0.0)) {
            for (f, slot) in spectrum.iter_mut().enumerate() {
                *slot = match bin_subchannel[f] {
                    Some(k) if inr[k] > 0.0 => {
                        // variance INR·len per bin gives INR × (sub-band share) per sample
                        let sd = (inr[k] * len as f64 / 2.0).sqrt();
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(sd * re, sd * im)
                    }
                    _ => Complex64::new(0.0, 0.0),
                };
            }
            ifft.process(&mut spectrum);
            let scale = 1.0 / len as f64;
            for (x, s) in row.iter_mut().zip(&spectrum) {
                *x += s * scale;
            }
        }

        let energy = w.amplitude * w.amplitude * pulse_len(w, fs) as f64;
        let l = pulse_len(w, fs);
        for tgt in targets {
            let gain = (10f64.powf(tgt.snr_db / 10.0) / energy).sqrt();
            let tau = tgt.delay_s();
            let doppler = 2.0 * PI * tgt.doppler_hz(cfg.carrier_hz) * m as f64 * cfg.pri_s;
            let g = Complex64::from_polar(gain, tgt.phase_rad + doppler);
            let first = ((tau * fs).ceil() as usize).max(start);
            let last = ((tau * fs).floor() as usize + l + 1).min(start + len);
            for n in first..last {
                let s = echo_sample(w, n as f64 / fs - tau);
                row[n - start] += g * s;
            }
        }
    }
    Ok(RawCpi {
        rows: cfg.pulses,
        cols: len,
        start,
        data,
    })
}

// Sub-channel of each FFT bin of a `len`-point transform, `None` outside the channel.
fn subchannel_of_bins(len: usize, fs: f64, grid: &ChannelGrid) -> Vec<Option<usize>> {
    let half = grid.bandwidth_hz() / 2.0;
    (0..len)
        .map(|f| {
            let k = if f < len.div_ceil(2) { f as f64 } else { f as f64 - len as f64 };
            let freq = k * fs / len as f64;
            (freq >= -half && freq < half).then(|| grid.subchannel_of(freq))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signalchain::SPEED_OF_LIGHT;
    use crate::spectrum::{Catalog, CatalogSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(pulses: usize) -> (Catalog, CpiConfig) {
        let grid = ChannelGrid::new(100e6, 10, -90.0).unwrap();
        let cat = Catalog::from_spec(&grid, &CatalogSpec::default()).unwrap();
        let cfg = CpiConfig {
            pulses,
            ..Default::default()
        };
        (cat, cfg)
    }

    #[test]
    fn silent_scene_is_zero() {
        let (cat, mut cfg) = setup(4);
        cfg.noise_enabled = false;
        let seq = vec![*cat.get(0); 4];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let raw = simulate_cpi(&seq, &[], &[], &cfg, cat.grid(), &mut rng).unwrap();
        assert_eq!(raw.data.len(), 4 * 10240);
        assert!(raw.data.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn doppler_phase_advance() {
        let (cat, mut cfg) = setup(3);
        cfg.noise_enabled = false;
        let tgt = Target::new(3100.0, 30.0, 10.0);
        // 600 Hz with c rounded to 3e8
        assert!((tgt.doppler_hz(3e9) - 2.0 * 30.0 * 3e9 / SPEED_OF_LIGHT).abs() < 1e-9);
        assert!((tgt.doppler_hz(3e9) - 600.0).abs() < 0.5);
        let seq = vec![*cat.get(cat.widest()); 3];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let raw = simulate_cpi(&seq, &[tgt], &[], &cfg, cat.grid(), &mut rng).unwrap();
        let n = (tgt.delay_s() * cfg.fs_hz).ceil() as usize + 100;
        let step = (raw.row(1)[n] * raw.row(0)[n].conj()).arg();
        let expected = 2.0 * PI * tgt.doppler_hz(3e9) * cfg.pri_s;
        assert!((step - expected).abs() < 1e-9);
        assert!((expected - 2.0 * PI * 600.0 * 1.024e-4).abs() < 5e-4);
    }

    #[test]
    fn superposition_without_noise() {
        let (cat, mut cfg) = setup(8);
        cfg.noise_enabled = false;
        let seq: Vec<_> = (0..8).map(|m| *cat.get(m * 6)).collect();
        let a = [Target::new(3050.0, 10.0, 12.0)];
        let b = [Target::new(3200.5, -40.0, 18.0), Target::new(3300.0, 0.0, 5.0)];
        let both: Vec<_> = a.iter().chain(&b).copied().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ra = simulate_cpi(&seq, &a, &[], &cfg, cat.grid(), &mut rng).unwrap();
        let rb = simulate_cpi(&seq, &b, &[], &cfg, cat.grid(), &mut rng).unwrap();
        let rab = simulate_cpi(&seq, &both, &[], &cfg, cat.grid(), &mut rng).unwrap();
        for i in 0..rab.data.len() {
            assert!((rab.data[i] - ra.data[i] - rb.data[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn noise_and_interference_power() {
        let (cat, cfg) = setup(16);
        let seq = vec![*cat.get(0); 16];
        let mut inr = vec![0.0; 10];
        inr[3] = 100.0;
        let rows = vec![inr; 16];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let raw = simulate_window(&seq, &[], &rows, &cfg, cat.grid(), (0, 4096), &mut rng).unwrap();
        let p: f64 = raw.data.iter().map(|x| x.norm_sqr()).sum::<f64>() / raw.data.len() as f64;
        // unit noise plus 100 × (1/10 of the band)
        assert!((p - 11.0).abs() / 11.0 < 0.03, "{p}");

        // the interference must sit in sub-channel 3 only
        let mut buf = raw.row(0).to_vec();
        FftPlanner::new().plan_fft_forward(4096).process(&mut buf);
        let map = subchannel_of_bins(4096, 100e6, cat.grid());
        let mut per_sub = [0.0; 10];
        for (f, x) in buf.iter().enumerate() {
            per_sub[map[f].unwrap()] += x.norm_sqr();
        }
        let total: f64 = per_sub.iter().sum();
        assert!(per_sub[3] / total > 0.85);
    }

    #[test]
    fn validates_inputs() {
        let (cat, cfg) = setup(4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let seq = vec![*cat.get(0); 3];
        assert!(simulate_cpi(&seq, &[], &[], &cfg, cat.grid(), &mut rng).is_err());
    }
}
