use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::{wrap_phase, SwarmalatorState};
use crate::error::{Error, Result};

const BLOWUP_RADIUS: f64 = 1e6;

/// Per-agent swarmalator coefficients.
///
/// Agent `i` uses its own coefficients for every pair term it feels, which
/// is how a single anomalous agent differs from the rest of the swarm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwarmalatorParams {
    /// Spatial attraction.
    pub a: f64,
    /// Spatial repulsion.
    pub b: f64,
    /// Phase-dependent modulation of attraction.
    pub j: f64,
    /// Phase coupling.
    pub k: f64,
    /// Natural frequency.
    pub omega: f64,
    pub dt: f64,
}

impl SwarmalatorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) {
            return Err(Error::InvalidParameter(format!("B must be positive, got {}", self.b)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        for (name, v) in [("A", self.a), ("J", self.j), ("K", self.k), ("omega", self.omega)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

/// Forward-Euler step of
///
/// ```text
/// dx_i/dt = 1/N Σ_{j≠i} [ (x_j-x_i)/|x_j-x_i| (A_i + J_i cos(θ_j-θ_i)) - B_i (x_j-x_i)/|x_j-x_i|² ]
/// dθ_i/dt = ω_i + K_i/N Σ_{j≠i} sin(θ_j-θ_i) / |x_j-x_i|
/// ```
///
/// Coincident pairs contribute nothing. The returned state carries the
/// `dx/dt` evaluated at the pre-step state.
pub fn swarmalator_step(
    state: &SwarmalatorState,
    params: &[SwarmalatorParams],
) -> Result<SwarmalatorState> {
    let n = state.positions.len();
    if params.len() != n || state.phases.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: params.len().min(state.phases.len()),
        });
    }
    let inv_n = 1.0 / n as f64;

    // Pair geometry is shared; the coefficients are per receiving agent.
    let trig: Vec<(f64, f64)> = state.phases.iter().map(|t| t.sin_cos()).collect();
    let mut dx = vec![Vector2::zeros(); n];
    let mut dtheta = vec![0.0; n];
    for i in 0..n {
        let xi = state.positions[i];
        let (si, ci) = trig[i];
        let pi = &params[i];
        for j in (i + 1)..n {
            let offset = state.positions[j] - xi;
            let dist_sq = offset.norm_squared();
            if dist_sq == 0.0 {
                continue;
            }
            let dist = dist_sq.sqrt();
            let unit = offset / dist;
            let (sj, cj) = trig[j];
            let sin_d = sj * ci - cj * si;
            let cos_d = cj * ci + sj * si;
            let pj = &params[j];

            dx[i] += unit * (pi.a + pi.j * cos_d) - offset * (pi.b / dist_sq);
            dx[j] -= unit * (pj.a + pj.j * cos_d) - offset * (pj.b / dist_sq);
            dtheta[i] += pi.k * sin_d / dist;
            dtheta[j] -= pj.k * sin_d / dist;
        }
    }

    let mut positions = Vec::with_capacity(n);
    let mut velocities = Vec::with_capacity(n);
    let mut phases = Vec::with_capacity(n);
    for i in 0..n {
        let p = &params[i];
        let v = dx[i] * inv_n;
        let x = state.positions[i] + v * p.dt;
        if !(x.norm() <= BLOWUP_RADIUS) {
            return Err(Error::NumericalBlowup { agent: i });
        }
        positions.push(x);
        velocities.push(v);
        phases.push(wrap_phase(
            state.phases[i] + p.dt * (p.omega + dtheta[i] * inv_n),
        ));
    }
    Ok(SwarmalatorState {
        positions,
        velocities,
        phases,
        step: state.step + 1,
    })
}
