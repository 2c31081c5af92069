use nalgebra::{Matrix3, Vector3};
use rand::Rng;

use super::history::ContextVector;
use crate::error::{Error, Result};

/// Ridge added to `Q_t` before inversion; `Q_t` has rank at most `|W'|`.
pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Mixture of exponential weights over cumulative estimated costs with an
/// exploration distribution `pi`. All slices are indexed by position in the
/// admissible set.
pub fn exp3_distribution(cum_cost: &[f64], epsilon: f64, gamma: f64, pi: &[f64]) -> Vec<f64> {
    assert_eq!(cum_cost.len(), pi.len());
    if cum_cost.is_empty() {
        return Vec::new();
    }
    // exp(-ε c) is largest at the smallest cumulative cost
    let min = cum_cost.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = cum_cost.iter().map(|c| (-epsilon * (c - min)).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights
        .iter()
        .zip(pi)
        .map(|(w, p)| gamma * p + (1.0 - gamma) * w / total)
        .collect()
}

/// Least-squares cost estimate for every admissible waveform from the single
/// observed cost. Returns `(θ̂_t, Ĉ)` with `Ĉ` aligned to `contexts`.
pub fn exp3_estimate(
    contexts: &[ContextVector],
    probs: &[f64],
    chosen: usize,
    cost: f64,
    ridge: f64,
) -> (Vector3<f64>, Vec<f64>) {
    assert_eq!(contexts.len(), probs.len());
    let mut q = Matrix3::identity() * ridge;
    for (x, p) in contexts.iter().zip(probs) {
        q += *p * x.as_vector() * x.as_vector().transpose();
    }
    let rhs = contexts[chosen].as_vector() * cost;
    let theta = q
        .cholesky()
        .map(|c| c.solve(&rhs))
        .unwrap_or_else(|| q.try_inverse().expect("ridge keeps Q invertible") * rhs);
    let est = contexts.iter().map(|x| x.as_vector().dot(&theta)).collect();
    (theta, est)
}

/// Cumulative estimated costs per catalog waveform plus the EXP3 knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct Exp3State {
    cum_cost_est: Vec<f64>,
    epsilon: f64,
    gamma: f64,
    ridge: f64,
}

impl Exp3State {
    pub fn new(catalog_len: usize, epsilon: f64, gamma: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::param("epsilon", format!("must lie in (0, 1), got {epsilon}")));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::param("gamma", format!("must lie in [0, 1], got {gamma}")));
        }
        Ok(Self {
            cum_cost_est: vec![0.0; catalog_len],
            epsilon,
            gamma,
            ridge: DEFAULT_RIDGE,
        })
    }

    pub fn cum_cost_est(&self) -> &[f64] {
        &self.cum_cost_est
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Selection distribution over the admissible ids with `pi` uniform on them.
    pub fn distribution(&self, ids: &[usize]) -> Vec<f64> {
        let cum: Vec<f64> = ids.iter().map(|&i| self.cum_cost_est[i]).collect();
        let pi = vec![1.0 / ids.len() as f64; ids.len()];
        exp3_distribution(&cum, self.epsilon, self.gamma, &pi)
    }

    /// Samples a position from `probs` by inversion.
    pub fn sample<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // rounding left u at the very top
        probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
    }

    /// Folds this round's estimates into the admissible waveforms' totals.
    /// Waveforms outside the admissible set are left untouched.
    pub fn update(
        &mut self,
        contexts: &[(usize, ContextVector)],
        probs: &[f64],
        chosen: usize,
        cost: f64,
    ) -> Vector3<f64> {
        let xs: Vec<ContextVector> = contexts.iter().map(|(_, x)| *x).collect();
        let (theta, est) = exp3_estimate(&xs, probs, chosen, cost, self.ridge);
        for ((id, _), c) in contexts.iter().zip(est) {
            self.cum_cost_est[*id] += c;
        }
        theta
    }
}
