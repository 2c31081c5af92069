use serde::{Deserialize, Serialize};

use super::catalog::{Catalog, Waveform};
use super::grid::{ChannelGrid, InterferenceVector};
use crate::error::{Error, Result};

/// Weights of the three cost terms plus the distortion normalizers and tolerance.
///
/// `gamma1`/`gamma2` are in Hz⁻² and scale squared center-frequency and
/// bandwidth jumps respectively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub dhat: f64,
}

impl CostWeights {
    pub fn new(betas: [f64; 3], gammas: [f64; 2], dhat: f64) -> Result<Self> {
        let w = Self {
            beta1: betas[0],
            beta2: betas[1],
            beta3: betas[2],
            gamma1: gammas[0],
            gamma2: gammas[1],
            dhat,
        };
        w.validate()?;
        Ok(w)
    }

    /// Picks `gamma1 = 1/(2 Δfc_max²)`, `gamma2 = 1/(2 Δbw_max²)` over the
    /// catalog, then rescales both so the largest pairwise distortion is 1.
    pub fn normalized(catalog: &Catalog, betas: [f64; 3], dhat: f64) -> Result<Self> {
        let ws = catalog.waveforms();
        let mut dfc_max: f64 = 0.0;
        let mut dbw_max: f64 = 0.0;
        for a in ws {
            for b in ws {
                dfc_max = dfc_max.max((a.fc_hz - b.fc_hz).abs());
                dbw_max = dbw_max.max((a.bw_hz - b.bw_hz).abs());
            }
        }
        let inv = |d: f64| if d > 0.0 { 1.0 / (2.0 * d * d) } else { 0.0 };
        let (mut g1, mut g2) = (inv(dfc_max), inv(dbw_max));
        let mut d_max: f64 = 0.0;
        for a in ws {
            for b in ws {
                let dfc = a.fc_hz - b.fc_hz;
                let dbw = a.bw_hz - b.bw_hz;
                d_max = d_max.max(g1 * dfc * dfc + g2 * dbw * dbw);
            }
        }
        if d_max > 0.0 {
            g1 /= d_max;
            g2 /= d_max;
        }
        Self::new(betas, [g1, g2], dhat)
    }

    pub fn betas(&self) -> [f64; 3] {
        [self.beta1, self.beta2, self.beta3]
    }

    pub fn validate(&self) -> Result<()> {
        let betas = self.betas();
        if betas.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return Err(Error::param("beta", format!("each weight must lie in [0, 1]: {betas:?}")));
        }
        let sum: f64 = betas.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::param("beta", format!("weights sum to {sum}, not 1")));
        }
        if !(self.gamma1 >= 0.0 && self.gamma2 >= 0.0) {
            return Err(Error::param("gamma", "normalizers must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.dhat) {
            return Err(Error::param("dhat", format!("must lie in [0, 1], got {}", self.dhat)));
        }
        Ok(())
    }
}

/// Fraction of the channel occupied by both the waveform and the interference.
pub fn collision_bw(w: &Waveform, s: &InterferenceVector, grid: &ChannelGrid) -> f64 {
    assert_eq!(s.len(), grid.subchannels(), "interference vector length");
    let (lo, hi) = w.band();
    let shared = grid.occupancy_mask(lo, hi) & s.bits();
    shared.count_ones() as f64 / grid.subchannels() as f64
}

/// Bandwidth left unused relative to the widest collision-free catalog waveform,
/// as a fraction of the channel. Zero when nothing in the catalog is clean.
pub fn missed_bw(w: &Waveform, s: &InterferenceVector, catalog: &Catalog) -> f64 {
    let grid = catalog.grid();
    let mut widest: Option<&Waveform> = None;
    for cand in catalog.iter() {
        if collision_bw(cand, s, grid) == 0.0 && widest.is_none_or(|b| cand.bw_hz > b.bw_hz) {
            widest = Some(cand);
        }
    }
    match widest {
        Some(best) => ((best.bw_hz - w.bw_hz) / grid.bandwidth_hz()).max(0.0),
        None => 0.0,
    }
}

/// Squared jump in center frequency and bandwidth from the previous pulse.
/// Zero when there is no previous pulse.
pub fn distortion(w: &Waveform, prev: Option<&Waveform>, weights: &CostWeights) -> f64 {
    match prev {
        None => 0.0,
        Some(p) => {
            let dfc = w.fc_hz - p.fc_hz;
            let dbw = w.bw_hz - p.bw_hz;
            weights.gamma1 * dfc * dfc + weights.gamma2 * dbw * dbw
        }
    }
}

/// Weighted sum of collision, missed bandwidth and distortion, evaluated
/// against the true (post-transmission) interference.
pub fn cost(
    w: &Waveform,
    s_true: &InterferenceVector,
    prev: Option<&Waveform>,
    catalog: &Catalog,
    weights: &CostWeights,
) -> f64 {
    weights.beta1 * collision_bw(w, s_true, catalog.grid())
        + weights.beta2 * missed_bw(w, s_true, catalog)
        + weights.beta3 * distortion(w, prev, weights)
}

/// `L1 |Δfc| + L2 |Δbw|` with `L1`, `L2` in Hz⁻¹.
pub fn lipschitz_metric(wi: &Waveform, wj: &Waveform, l1: f64, l2: f64) -> f64 {
    l1 * (wi.fc_hz - wj.fc_hz).abs() + l2 * (wi.bw_hz - wj.bw_hz).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub collision: f64,
    pub missed: f64,
    pub distortion: f64,
    pub total: f64,
}

/// Catalog-indexed cost evaluation using the cached sub-channel footprints.
/// Agrees exactly with the free functions in this module.
#[derive(Debug, Clone)]
pub struct CostModel {
    catalog: Catalog,
    weights: CostWeights,
}

impl CostModel {
    pub fn new(catalog: Catalog, weights: CostWeights) -> Result<Self> {
        weights.validate()?;
        Ok(Self { catalog, weights })
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn weights(&self) -> &CostWeights {
        &self.weights
    }

    pub fn grid(&self) -> &ChannelGrid {
        self.catalog.grid()
    }

    pub fn collision(&self, id: usize, s: &InterferenceVector) -> f64 {
        (self.catalog.mask(id) & s.bits()).count_ones() as f64
            / self.grid().subchannels() as f64
    }

    /// Widest collision-free waveform, lowest id on ties.
    pub fn widest_clean(&self, s: &InterferenceVector) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (id, w) in self.catalog.iter().enumerate() {
            if self.catalog.mask(id) & s.bits() == 0
                && best.is_none_or(|b| w.bw_hz > self.catalog.get(b).bw_hz)
            {
                best = Some(id);
            }
        }
        best
    }

    pub fn missed(&self, id: usize, s: &InterferenceVector) -> f64 {
        self.missed_given(id, self.widest_clean(s))
    }

    fn missed_given(&self, id: usize, widest: Option<usize>) -> f64 {
        match widest {
            Some(b) => ((self.catalog.get(b).bw_hz - self.catalog.get(id).bw_hz)
                / self.grid().bandwidth_hz())
            .max(0.0),
            None => 0.0,
        }
    }

    pub fn distortion(&self, id: usize, prev: Option<usize>) -> f64 {
        distortion(
            self.catalog.get(id),
            prev.map(|p| self.catalog.get(p)),
            &self.weights,
        )
    }

    pub fn breakdown(&self, id: usize, s: &InterferenceVector, prev: Option<usize>) -> CostBreakdown {
        self.breakdown_given(id, s, prev, self.widest_clean(s))
    }

    fn breakdown_given(
        &self,
        id: usize,
        s: &InterferenceVector,
        prev: Option<usize>,
        widest: Option<usize>,
    ) -> CostBreakdown {
        let collision = self.collision(id, s);
        let missed = self.missed_given(id, widest);
        let distortion = self.distortion(id, prev);
        let w = &self.weights;
        CostBreakdown {
            collision,
            missed,
            distortion,
            total: w.beta1 * collision + w.beta2 * missed + w.beta3 * distortion,
        }
    }

    pub fn cost(&self, id: usize, s: &InterferenceVector, prev: Option<usize>) -> f64 {
        self.breakdown(id, s, prev).total
    }

    /// Cost of every catalog waveform under `s` given the previous pulse.
    pub fn all_costs(&self, s: &InterferenceVector, prev: Option<usize>) -> Vec<f64> {
        let widest = self.widest_clean(s);
        (0..self.catalog.len())
            .map(|id| self.breakdown_given(id, s, prev, widest).total)
            .collect()
    }
}
