use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectrum::Waveform;

/// Samples in one pulse at rate `fs`.
pub fn pulse_len(w: &Waveform, fs: f64) -> usize {
    (w.duration_s * fs).round() as usize
}

/// Chirp value `t_rel` seconds after the pulse leading edge; zero outside the pulse.
#[inline]
pub fn echo_sample(w: &Waveform, t_rel: f64) -> Complex64 {
    if !(0.0..w.duration_s).contains(&t_rel) {
        return Complex64::new(0.0, 0.0);
    }
    let t = t_rel - w.duration_s / 2.0;
    let phase = 2.0 * PI * (w.fc_hz * t + 0.5 * w.slope() * t * t);
    Complex64::from_polar(w.amplitude, phase)
}

/// Analytic-baseband LFM pulse sampled over `[-T/2, T/2)`, sweeping
/// `fc - bw/2` to `fc + bw/2`.
pub fn synth_pulse(w: &Waveform, fs: f64) -> Result<Vec<Complex64>> {
    let (lo, hi) = w.band();
    if w.bw_hz > fs || lo < -fs / 2.0 - 1e-6 || hi > fs / 2.0 + 1e-6 {
        return Err(Error::Aliasing {
            bw_hz: w.bw_hz,
            fs_hz: fs,
        });
    }
    Ok((0..pulse_len(w, fs))
        .map(|n| echo_sample(w, n as f64 / fs))
        .collect())
}
