use serde::{Deserialize, Serialize};

/// Per-PRI realized and hindsight-optimal costs. Regret accrues as
/// `realized - optimal` against the unconstrained catalog optimum; the
/// constrained optimum is logged alongside.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegretLedger {
    realized: Vec<f64>,
    optimal: Vec<f64>,
    constrained_optimal: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RegretLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends one PRI. `all_costs` covers the whole catalog; `admissible`
    /// (catalog ids) defaults to the whole catalog.
    pub fn step(&mut self, realized: f64, all_costs: &[f64], admissible: Option<&[usize]>) -> f64 {
        assert!(!all_costs.is_empty(), "regret needs the full catalog's costs");
        let optimal = all_costs.iter().cloned().fold(f64::INFINITY, f64::min);
        let constrained = match admissible {
            Some(ids) => ids.iter().map(|&i| all_costs[i]).fold(f64::INFINITY, f64::min),
            None => optimal,
        };
        let step = realized - optimal;
        debug_assert!(step >= -1e-12, "realized cost below the catalog optimum");
        let total = self.cumulative() + step;
        self.realized.push(realized);
        self.optimal.push(optimal);
        self.constrained_optimal.push(constrained);
        self.cumulative.push(total);
        step
    }

    pub fn cumulative(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.realized.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realized.is_empty()
    }

    pub fn realized(&self) -> &[f64] {
        &self.realized
    }

    pub fn optimal(&self) -> &[f64] {
        &self.optimal
    }

    pub fn constrained_optimal(&self) -> &[f64] {
        &self.constrained_optimal
    }

    pub fn trajectory(&self) -> &[f64] {
        &self.cumulative
    }

    /// Per-PRI regret increments.
    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.realized.iter().zip(&self.optimal).map(|(r, o)| r - o)
    }
}
