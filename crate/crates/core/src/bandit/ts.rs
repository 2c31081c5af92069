use nalgebra::{Cholesky, Matrix3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use super::history::ContextVector;
use crate::error::{Error, Result};

/// Gaussian posterior for linear Thompson sampling: precision `B`, moment
/// vector `f` and mean `theta_hat = B⁻¹ f`.
#[derive(Debug, Clone, PartialEq)]
pub struct TsState {
    b: Matrix3<f64>,
    f: Vector3<f64>,
    theta_hat: Vector3<f64>,
    /// Multiplier on the sampling covariance `B⁻¹`.
    scale: f64,
}

impl Default for TsState {
    fn default() -> Self {
        Self::new()
    }
}

impl TsState {
    pub fn new() -> Self {
        Self::with_scale(1.0)
    }

    pub fn with_scale(scale: f64) -> Self {
        Self {
            b: Matrix3::identity(),
            f: Vector3::zeros(),
            theta_hat: Vector3::zeros(),
            scale,
        }
    }

    pub fn precision(&self) -> &Matrix3<f64> {
        &self.b
    }

    pub fn moment(&self) -> &Vector3<f64> {
        &self.f
    }

    pub fn theta_hat(&self) -> &Vector3<f64> {
        &self.theta_hat
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Draws `θ̃ ~ N(θ̂, scale · B⁻¹)`.
    pub fn sample_theta<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vector3<f64>> {
        let chol = Cholesky::new(self.b).ok_or(Error::LinearAlgebra("precision not positive definite"))?;
        let z = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        // B = L Lᵀ, so L⁻ᵀ z has covariance B⁻¹
        let u = chol
            .l()
            .transpose()
            .solve_upper_triangular(&z)
            .ok_or(Error::LinearAlgebra("singular Cholesky factor"))?;
        Ok(self.theta_hat + self.scale.sqrt() * u)
    }

    /// Rank-one posterior update with context `x` and observed cost `c`.
    pub fn update(&mut self, x: &ContextVector, c: f64) {
        let x = x.as_vector();
        self.b += x * x.transpose();
        self.f += x * c;
        self.theta_hat = Cholesky::new(self.b)
            .expect("B = I + Σxxᵀ is positive definite")
            .solve(&self.f);
    }
}

/// Position in `contexts` minimizing `⟨x, θ⟩`, lowest waveform id on ties.
pub fn argmin_inner(contexts: &[(usize, ContextVector)], theta: &Vector3<f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (pos, (id, x)) in contexts.iter().enumerate() {
        let v = x.as_vector().dot(theta);
        let better = match best {
            None => true,
            Some((bp, bv)) => v < bv || (v == bv && *id < contexts[bp].0),
        };
        if better {
            best = Some((pos, v));
        }
    }
    best.map(|(pos, _)| pos)
}

/// One Thompson-sampling decision over the admissible set. Returns the
/// selected waveform id.
pub fn ts_select<R: Rng + ?Sized>(
    contexts: &[(usize, ContextVector)],
    state: &TsState,
    rng: &mut R,
) -> Result<usize> {
    if contexts.is_empty() {
        return Err(Error::Invariant("empty action set".into()));
    }
    let theta = state.sample_theta(rng)?;
    let pos = argmin_inner(contexts, &theta).expect("nonempty");
    Ok(contexts[pos].0)
}

pub fn ts_update(state: &mut TsState, x: &ContextVector, c: f64) {
    state.update(x, c);
}
