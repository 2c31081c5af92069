use serde::{Deserialize, Serialize};

use super::cfar::DetectionReport;
use super::matched::RangeDopplerMap;

/// Half-widths of the window around a true target inside which a flagged
/// cell counts as a detection. Doppler distance wraps around the map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerance {
    pub range: usize,
    pub doppler: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { range: 1, doppler: 2 }
    }
}

impl Tolerance {
    fn covers(&self, rows: usize, cell: (usize, usize), target: (usize, usize)) -> bool {
        let dr = cell.0.abs_diff(target.0);
        let dr = dr.min(rows - dr);
        dr <= self.doppler && cell.1.abs_diff(target.1) <= self.range
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionScore {
    pub pfa_desired: f64,
    pub detected: usize,
    pub targets: usize,
    pub pd: f64,
    pub false_alarms: usize,
    pub cells: usize,
    pub pfa_empirical: f64,
}

/// Partitions the flagged cells of `report` into target hits and false
/// alarms. `targets` holds each target's expected `(doppler row, range col)`;
/// `None` marks a target outside the processed gate, which can never be hit.
pub fn score_detections(report: &DetectionReport, targets: &[Option<(usize, usize)>], tol: Tolerance) -> DetectionScore {
    let mut hit = vec![false; targets.len()];
    let mut false_alarms = 0;
    for &cell in &report.detections {
        let mut near = false;
        for (k, t) in targets.iter().enumerate() {
            if let Some(t) = t {
                if tol.covers(report.rows, cell, *t) {
                    hit[k] = true;
                    near = true;
                }
            }
        }
        if !near {
            false_alarms += 1;
        }
    }
    let detected = hit.iter().filter(|h| **h).count();
    let cells = report.cells();
    DetectionScore {
        pfa_desired: report.pfa,
        detected,
        targets: targets.len(),
        pd: if targets.is_empty() { 0.0 } else { detected as f64 / targets.len() as f64 },
        false_alarms,
        cells,
        pfa_empirical: if cells == 0 { 0.0 } else { false_alarms as f64 / cells as f64 },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub pfa_desired: f64,
    pub pd_mean: f64,
    pub pfa_empirical: f64,
    pub samples: usize,
}

/// Averages P_d and empirical P_fa per desired P_fa over every score given,
/// ascending in P_fa.
pub fn roc_curve(scores: &[DetectionScore]) -> Vec<RocPoint> {
    let mut pfas: Vec<f64> = scores.iter().map(|s| s.pfa_desired).collect();
    pfas.sort_by(f64::total_cmp);
    pfas.dedup();
    pfas.into_iter()
        .map(|pfa| {
            let group: Vec<_> = scores.iter().filter(|s| s.pfa_desired == pfa).collect();
            let n = group.len() as f64;
            RocPoint {
                pfa_desired: pfa,
                pd_mean: group.iter().map(|s| s.pd).sum::<f64>() / n,
                pfa_empirical: group.iter().map(|s| s.pfa_empirical).sum::<f64>() / n,
                samples: group.len(),
            }
        })
        .collect()
}

/// Energy leaked across Doppler near each target: power within `range_halfwidth`
/// columns of the target, excluding rows within `doppler_guard` of its
/// Doppler row. Cells near several targets are counted once.
pub fn off_target_doppler_energy(
    map: &RangeDopplerMap,
    targets: &[(usize, usize)],
    range_halfwidth: usize,
    doppler_guard: usize,
) -> f64 {
    let (rows, cols) = (map.rows(), map.cols());
    let mut energy = 0.0;
    for r in 0..rows {
        for c in 0..cols {
            let mut in_strip = false;
            let mut on_target = false;
            for &(tr, tc) in targets {
                if c.abs_diff(tc) <= range_halfwidth {
                    in_strip = true;
                    let dr = r.abs_diff(tr);
                    if dr.min(rows - dr) <= doppler_guard {
                        on_target = true;
                    }
                }
            }
            if in_strip && !on_target {
                energy += map.power_at(r, c);
            }
        }
    }
    energy
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(rows: usize, cols: usize, pfa: f64, cells: &[(usize, usize)]) -> DetectionReport {
        let mut mask = vec![false; rows * cols];
        for &(r, c) in cells {
            mask[r * cols + c] = true;
        }
        DetectionReport {
            rows,
            cols,
            pfa,
            mask,
            detections: cells.to_vec(),
        }
    }

    #[test]
    fn empty_mask() {
        let s = score_detections(&report(16, 16, 1e-3, &[]), &[Some((3, 3))], Tolerance::default());
        assert_eq!((s.detected, s.false_alarms, s.pd), (0, 0, 0.0));
    }

    #[test]
    fn exact_targets() {
        let t = [(2, 5), (10, 12), (7, 1), (15, 15)];
        let s = score_detections(
            &report(16, 16, 1e-6, &t),
            &t.iter().copied().map(Some).collect::<Vec<_>>(),
            Tolerance::default(),
        );
        assert_eq!((s.detected, s.false_alarms), (4, 0));
        assert_eq!(s.pd, 1.0);
    }

    #[test]
    fn tolerance_window_and_wrap() {
        let targets = [Some((0, 5))];
        let tol = Tolerance::default();
        // doppler wraps: row 15 is one bin from row 0
        let s = score_detections(&report(16, 16, 0.1, &[(15, 6), (14, 4)]), &targets, tol);
        assert_eq!((s.detected, s.false_alarms), (1, 0));
        let s = score_detections(&report(16, 16, 0.1, &[(3, 5), (0, 7)]), &targets, tol);
        assert_eq!((s.detected, s.false_alarms), (0, 2));
        assert!((s.pfa_empirical - 2.0 / 256.0).abs() < 1e-15);
    }

    #[test]
    fn multiple_hits_count_once() {
        let s = score_detections(
            &report(16, 16, 0.1, &[(4, 4), (4, 5), (5, 5)]),
            &[Some((4, 5)), None],
            Tolerance::default(),
        );
        assert_eq!((s.detected, s.targets, s.false_alarms), (1, 2, 0));
        assert_eq!(s.pd, 0.5);
    }

    #[test]
    fn roc_sorted_means() {
        let mk = |pfa, pd, fa| DetectionScore {
            pfa_desired: pfa,
            detected: 0,
            targets: 4,
            pd,
            false_alarms: 0,
            cells: 100,
            pfa_empirical: fa,
        };
        let pts = roc_curve(&[mk(1e-3, 1.0, 0.01), mk(1e-6, 0.5, 0.0), mk(1e-3, 0.5, 0.03)]);
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].pfa_desired, 1e-6);
        assert_eq!(pts[1].pd_mean, 0.75);
        assert!((pts[1].pfa_empirical - 0.02).abs() < 1e-15);
        assert_eq!(pts[1].samples, 2);
    }
}
