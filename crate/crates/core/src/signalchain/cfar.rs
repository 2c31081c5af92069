use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-widths of the guard region and the training band beyond it,
/// `(doppler, range)` in cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CfarWindow {
    pub guard: (usize, usize),
    pub training: (usize, usize),
}

impl Default for CfarWindow {
    fn default() -> Self {
        Self {
            guard: (2, 2),
            training: (8, 8),
        }
    }
}

impl CfarWindow {
    pub fn validate(&self) -> Result<()> {
        if self.training.0 == 0 || self.training.1 == 0 {
            return Err(Error::CfarConfig(format!(
                "guard {:?} leaves no training cells (training {:?})",
                self.guard, self.training
            )));
        }
        Ok(())
    }
}

/// CA-CFAR scale for `n` exponential training cells at false-alarm rate `pfa`.
pub fn threshold_factor(n: usize, pfa: f64) -> f64 {
    let n = n as f64;
    n * (pfa.powf(-1.0 / n) - 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub rows: usize,
    pub cols: usize,
    pub pfa: f64,
    pub mask: Vec<bool>,
    /// Flagged `(doppler row, range column)` cells in row-major order.
    pub detections: Vec<(usize, usize)>,
}

impl DetectionReport {
    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }
}

/// Training-ring statistics for every cell of a power map, reusable across
/// false-alarm rates.
#[derive(Debug, Clone)]
pub struct CfarDetector {
    rows: usize,
    cols: usize,
    power: Vec<f64>,
    noise: Vec<f64>,
    count: Vec<u32>,
}

impl CfarDetector {
    /// Noise estimate per cell: mean power over the training ring with the
    /// guard block (which contains the cell) removed, clipped at the edges.
    pub fn new(power: &[f64], rows: usize, cols: usize, window: &CfarWindow) -> Result<Self> {
        window.validate()?;
        if power.len() != rows * cols {
            return Err(Error::CfarConfig("power map size mismatch".into()));
        }
        // summed-area table with a zero border
        let w = cols + 1;
        let mut sat = vec![0.0f64; (rows + 1) * w];
        for r in 0..rows {
            let mut acc = 0.0;
            for c in 0..cols {
                acc += power[r * cols + c];
                sat[(r + 1) * w + c + 1] = sat[r * w + c + 1] + acc;
            }
        }
        let rect = |r0: usize, r1: usize, c0: usize, c1: usize| -> f64 {
            sat[r1 * w + c1] - sat[r0 * w + c1] - sat[r1 * w + c0] + sat[r0 * w + c0]
        };
        let (gd, gr) = window.guard;
        let (od, or) = (gd + window.training.0, gr + window.training.1);
        let mut noise = vec![0.0; rows * cols];
        let mut count = vec![0u32; rows * cols];
        for r in 0..rows {
            let (or0, or1) = (r.saturating_sub(od), (r + od + 1).min(rows));
            let (gr0, gr1) = (r.saturating_sub(gd), (r + gd + 1).min(rows));
            for c in 0..cols {
                let (oc0, oc1) = (c.saturating_sub(or), (c + or + 1).min(cols));
                let (gc0, gc1) = (c.saturating_sub(gr), (c + gr + 1).min(cols));
                let n = (or1 - or0) * (oc1 - oc0) - (gr1 - gr0) * (gc1 - gc0);
                let sum = rect(or0, or1, oc0, oc1) - rect(gr0, gr1, gc0, gc1);
                noise[r * cols + c] = if n > 0 { sum.max(0.0) / n as f64 } else { f64::INFINITY };
                count[r * cols + c] = n as u32;
            }
        }
        Ok(Self {
            rows,
            cols,
            power: power.to_vec(),
            noise,
            count,
        })
    }

    pub fn noise_estimate(&self, row: usize, col: usize) -> f64 {
        self.noise[row * self.cols + col]
    }

    pub fn training_cells(&self, row: usize, col: usize) -> usize {
        self.count[row * self.cols + col] as usize
    }

    pub fn detect(&self, pfa: f64) -> Result<DetectionReport> {
        if !(pfa > 0.0 && pfa < 1.0) {
            return Err(Error::CfarConfig(format!("P_fa must lie in (0, 1), got {pfa}")));
        }
        let max_n = self.count.iter().copied().max().unwrap_or(0) as usize;
        let factors: Vec<f64> = (0..=max_n).map(|n| threshold_factor(n.max(1), pfa)).collect();
        let mut mask = vec![false; self.power.len()];
        let mut detections = Vec::new();
        for (i, flag) in mask.iter_mut().enumerate() {
            let tau = factors[self.count[i] as usize];
            if self.power[i] > tau * self.noise[i] {
                *flag = true;
                detections.push((i / self.cols, i % self.cols));
            }
        }
        Ok(DetectionReport {
            rows: self.rows,
            cols: self.cols,
            pfa,
            mask,
            detections,
        })
    }
}

/// One-shot 2D CA-CFAR on a row-major power map.
pub fn cfar_2d(power: &[f64], rows: usize, cols: usize, pfa: f64, window: &CfarWindow) -> Result<DetectionReport> {
    CfarDetector::new(power, rows, cols, window)?.detect(pfa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp1};

    #[test]
    fn threshold_factor_limits() {
        // large N approaches -ln(pfa)
        assert!((threshold_factor(100_000, 1e-3) - 1e-3f64.ln().abs()).abs() < 1e-3);
        assert!((threshold_factor(1, 0.1) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_ring_mean() {
        let (rows, cols) = (20, 23);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let power: Vec<f64> = (0..rows * cols).map(|_| Exp1.sample(&mut rng)).collect();
        let win = CfarWindow {
            guard: (1, 2),
            training: (3, 2),
        };
        let det = CfarDetector::new(&power, rows, cols, &win).unwrap();
        for r in 0..rows {
            for c in 0..cols {
                let mut sum = 0.0;
                let mut n = 0;
                for rr in 0..rows {
                    for cc in 0..cols {
                        let (dr, dc) = (rr.abs_diff(r), cc.abs_diff(c));
                        let outer = dr <= 4 && dc <= 4;
                        let guard = dr <= 1 && dc <= 2;
                        if outer && !guard {
                            sum += power[rr * cols + cc];
                            n += 1;
                        }
                    }
                }
                assert_eq!(det.training_cells(r, c), n);
                assert!((det.noise_estimate(r, c) - sum / n as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn uniform_map_has_no_detections() {
        let power = vec![3.0; 40 * 40];
        // tau > 1 needs pfa below 1/e
        for pfa in [0.35, 0.1, 1e-3, 1e-6] {
            let rep = cfar_2d(&power, 40, 40, pfa, &CfarWindow::default()).unwrap();
            assert!(rep.detections.is_empty());
        }
    }

    #[test]
    fn single_strong_cell_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (rows, cols) = (64, 64);
        let mut power: Vec<f64> = (0..rows * cols).map(|_| Exp1.sample(&mut rng)).collect();
        power[30 * cols + 40] = 10f64.powf(4.0);
        let rep = cfar_2d(&power, rows, cols, 1e-6, &CfarWindow::default()).unwrap();
        assert!(rep.detections.contains(&(30, 40)));
        assert!(rep.mask[30 * cols + 40]);
    }

    #[test]
    fn flagged_cells_exceed_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let power: Vec<f64> = (0..100 * 100).map(|_| Exp1.sample(&mut rng)).collect();
        let det = CfarDetector::new(&power, 100, 100, &CfarWindow::default()).unwrap();
        let rep = det.detect(1e-2).unwrap();
        for &(r, c) in &rep.detections {
            let tau = threshold_factor(det.training_cells(r, c), 1e-2);
            assert!(power[r * 100 + c] > tau * det.noise_estimate(r, c));
        }
        assert_eq!(rep.detections.len(), rep.mask.iter().filter(|m| **m).count());
    }

    #[test]
    fn config_errors() {
        let bad = CfarWindow {
            guard: (2, 2),
            training: (0, 8),
        };
        assert!(matches!(cfar_2d(&[1.0; 100], 10, 10, 1e-3, &bad), Err(Error::CfarConfig(_))));
        assert!(cfar_2d(&[1.0; 100], 10, 10, 0.0, &CfarWindow::default()).is_err());
        assert!(cfar_2d(&[1.0; 99], 10, 10, 0.1, &CfarWindow::default()).is_err());
    }
}
