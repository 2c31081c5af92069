use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest sub-channel count representable by [`InterferenceVector`].
pub const MAX_SUBCHANNELS: usize = 64;

// Band edges closer than this (Hz) are treated as touching, not overlapping.
const EDGE_TOL_HZ: f64 = 1e-3;

/// The shared channel `[-B/2, +B/2]` split into `S` equal sub-channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGrid {
    bandwidth_hz: f64,
    subchannels: usize,
    harmful_threshold_dbm: f64,
}

impl ChannelGrid {
    pub fn new(bandwidth_hz: f64, subchannels: usize, harmful_threshold_dbm: f64) -> Result<Self> {
        if !(bandwidth_hz > 0.0 && bandwidth_hz.is_finite()) {
            return Err(Error::param("bandwidth_hz", "must be positive and finite"));
        }
        if subchannels == 0 || subchannels > MAX_SUBCHANNELS {
            return Err(Error::param(
                "subchannels",
                format!("must be in 1..={MAX_SUBCHANNELS}, got {subchannels}"),
            ));
        }
        if !harmful_threshold_dbm.is_finite() {
            return Err(Error::param("harmful_threshold_dbm", "must be finite"));
        }
        Ok(Self {
            bandwidth_hz,
            subchannels,
            harmful_threshold_dbm,
        })
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    pub fn subchannels(&self) -> usize {
        self.subchannels
    }

    pub fn harmful_threshold_dbm(&self) -> f64 {
        self.harmful_threshold_dbm
    }

    pub fn subchannel_width_hz(&self) -> f64 {
        self.bandwidth_hz / self.subchannels as f64
    }

    /// Edges `(lo, hi)` of sub-channel `j`, Hz. The last edge is pinned to `+B/2`.
    pub fn subchannel_edges(&self, j: usize) -> (f64, f64) {
        assert!(j < self.subchannels, "sub-channel {j} out of range");
        let half = self.bandwidth_hz / 2.0;
        let width = self.subchannel_width_hz();
        let lo = -half + j as f64 * width;
        let hi = if j + 1 == self.subchannels {
            half
        } else {
            -half + (j + 1) as f64 * width
        };
        (lo, hi)
    }

    /// Whether `[lo, hi]` lies inside the shared channel.
    pub fn contains(&self, lo: f64, hi: f64) -> bool {
        let half = self.bandwidth_hz / 2.0;
        lo >= -half - EDGE_TOL_HZ && hi <= half + EDGE_TOL_HZ && lo <= hi
    }

    /// Bit mask of the sub-channels that overlap `[lo, hi]` with nonzero measure.
    pub fn occupancy_mask(&self, lo: f64, hi: f64) -> u64 {
        (0..self.subchannels)
            .filter(|&j| {
                let (a, b) = self.subchannel_edges(j);
                hi.min(b) - lo.max(a) > EDGE_TOL_HZ
            })
            .fold(0u64, |m, j| m | (1u64 << j))
    }

    /// Sub-channel containing frequency `f`, clamped to the grid.
    pub fn subchannel_of(&self, f: f64) -> usize {
        let x = (f + self.bandwidth_hz / 2.0) / self.subchannel_width_hz();
        (x.floor().max(0.0) as usize).min(self.subchannels - 1)
    }
}

/// Binary occupancy of the `S` sub-channels; bit `j` is sub-channel `j`
/// counted from the lowest frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InterferenceVector {
    bits: u64,
    len: u8,
}

impl InterferenceVector {
    /// All-zero vector of length `len`.
    pub fn empty(len: usize) -> Self {
        assert!(
            (1..=MAX_SUBCHANNELS).contains(&len),
            "interference vector length {len} out of range"
        );
        Self {
            bits: 0,
            len: len as u8,
        }
    }

    pub fn all_ones(len: usize) -> Self {
        let mut v = Self::empty(len);
        v.bits = Self::full_mask(len);
        v
    }

    pub fn from_bits(bits: u64, len: usize) -> Result<Self> {
        if !(1..=MAX_SUBCHANNELS).contains(&len) {
            return Err(Error::param("len", format!("must be in 1..={MAX_SUBCHANNELS}")));
        }
        if bits & !Self::full_mask(len) != 0 {
            return Err(Error::param("bits", format!("set bits beyond length {len}")));
        }
        Ok(Self {
            bits,
            len: len as u8,
        })
    }

    pub fn from_indices(len: usize, occupied: &[usize]) -> Result<Self> {
        let mut v = Self::empty(len);
        for &j in occupied {
            if j >= len {
                return Err(Error::param("occupied", format!("index {j} >= length {len}")));
            }
            v.bits |= 1 << j;
        }
        Ok(v)
    }

    fn full_mask(len: usize) -> u64 {
        if len == 64 {
            u64::MAX
        } else {
            (1u64 << len) - 1
        }
    }

    /// Every one of the `2^len` possible vectors, in numeric order.
    pub fn enumerate(len: usize) -> impl Iterator<Item = InterferenceVector> {
        assert!(len <= 20, "refusing to enumerate 2^{len} vectors");
        (0..(1u64 << len)).map(move |bits| InterferenceVector {
            bits,
            len: len as u8,
        })
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn get(&self, j: usize) -> bool {
        assert!(j < self.len(), "index {j} out of range");
        self.bits >> j & 1 == 1
    }

    pub fn set(&mut self, j: usize, value: bool) {
        assert!(j < self.len(), "index {j} out of range");
        if value {
            self.bits |= 1 << j;
        } else {
            self.bits &= !(1 << j);
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn occupied(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&j| self.get(j))
    }
}

impl fmt::Display for InterferenceVector {
    /// `S` characters of `0`/`1`, lowest sub-channel first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.len() {
            f.write_str(if self.get(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for InterferenceVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let len = s.chars().count();
        if !(1..=MAX_SUBCHANNELS).contains(&len) {
            return Err(Error::param("bits", format!("bad length {len}")));
        }
        let mut v = Self::empty(len);
        for (j, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(j, true),
                other => {
                    return Err(Error::param("bits", format!("unexpected character {other:?}")))
                }
            }
        }
        Ok(v)
    }
}
