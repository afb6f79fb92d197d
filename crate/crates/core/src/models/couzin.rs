use nalgebra::Vector3;
use rand::Rng;
use rand_distr::{Normal, UnitSphere};
use serde::{Deserialize, Serialize};

use super::{CouzinState, SimRng};
use crate::error::{Error, Result};

/// Per-agent parameters of the zonal model. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouzinParams {
    pub r_repulsion: f64,
    pub r_orientation: f64,
    pub r_attraction: f64,
    /// Field of perception; the blind spot behind the agent is `2π` minus this.
    pub perception_angle: f64,
    /// Radians per second.
    pub max_turn_rate: f64,
    pub speed: f64,
    pub noise_sd: f64,
    pub dt: f64,
}

impl CouzinParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("r_repulsion", self.r_repulsion),
            ("r_orientation", self.r_orientation),
            ("r_attraction", self.r_attraction),
            ("perception_angle", self.perception_angle),
            ("max_turn_rate", self.max_turn_rate),
            ("speed", self.speed),
            ("dt", self.dt),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise_sd must be nonnegative, got {}",
                self.noise_sd
            )));
        }
        if !(self.r_repulsion <= self.r_orientation && self.r_orientation <= self.r_attraction) {
            return Err(Error::InvalidParameter(format!(
                "zone radii must satisfy r_r <= r_o <= r_a, got {} / {} / {}",
                self.r_repulsion, self.r_orientation, self.r_attraction
            )));
        }
        if self.perception_angle > std::f64::consts::TAU {
            return Err(Error::InvalidParameter(format!(
                "perception_angle must be at most 2π, got {}",
                self.perception_angle
            )));
        }
        Ok(())
    }
}

/// Desired direction of agent `i` before noise, from the pre-step state.
fn desired_direction(state: &CouzinState, params: &CouzinParams, i: usize) -> Vector3<f64> {
    let xi = state.positions[i];
    let hi = state.headings[i];
    let cos_half_fov = (params.perception_angle / 2.0).cos();
    let see_all = params.perception_angle >= std::f64::consts::TAU;

    let mut repulse = Vector3::zeros();
    let mut n_repulse = 0usize;
    let mut align = Vector3::zeros();
    let mut n_align = 0usize;
    let mut attract = Vector3::zeros();
    let mut n_attract = 0usize;

    for (j, xj) in state.positions.iter().enumerate() {
        if j == i {
            continue;
        }
        let offset = xj - xi;
        let dist = offset.norm();
        if dist == 0.0 || dist > params.r_attraction {
            continue;
        }
        let toward = offset / dist;
        if !see_all && hi.dot(&toward) < cos_half_fov {
            continue;
        }
        if dist <= params.r_repulsion {
            repulse -= toward;
            n_repulse += 1;
        } else if dist <= params.r_orientation {
            align += state.headings[j];
            n_align += 1;
        } else {
            attract += toward;
            n_attract += 1;
        }
    }

    if n_repulse > 0 {
        return repulse;
    }
    let align = if n_align > 0 {
        normalized_or_zero(align + hi)
    } else {
        Vector3::zeros()
    };
    let attract = if n_attract > 0 {
        normalized_or_zero(attract)
    } else {
        Vector3::zeros()
    };
    match (align == Vector3::zeros(), attract == Vector3::zeros()) {
        (true, true) => hi,
        (false, true) => align,
        (true, false) => attract,
        (false, false) => (align + attract) / 2.0,
    }
}

fn normalized_or_zero(v: Vector3<f64>) -> Vector3<f64> {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        Vector3::zeros()
    }
}

/// Any unit vector orthogonal to `v` (assumed unit).
fn any_perpendicular(v: &Vector3<f64>) -> Vector3<f64> {
    let axis = if v.x.abs() <= v.y.abs() && v.x.abs() <= v.z.abs() {
        Vector3::x()
    } else if v.y.abs() <= v.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    v.cross(&axis).normalize()
}

/// Rotates unit `from` toward unit `to` within their common plane by
/// `angle` radians.
fn rotate_toward(from: &Vector3<f64>, to: &Vector3<f64>, angle: f64) -> Vector3<f64> {
    let ortho = to - from * from.dot(to);
    let w = if ortho.norm() > 1e-12 {
        ortho.normalize()
    } else {
        any_perpendicular(from)
    };
    (from * angle.cos() + w * angle.sin()).normalize()
}

fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    // atan2 form stays accurate for nearly (anti)parallel vectors.
    a.cross(b).norm().atan2(a.dot(b))
}

/// One synchronous update of the zonal model.
///
/// Each agent draws its noise from `rng` in index order, so the update is
/// deterministic for a given generator state.
pub fn couzin_step(
    state: &CouzinState,
    params: &[CouzinParams],
    rng: &mut SimRng,
) -> Result<CouzinState> {
    let n = state.positions.len();
    if params.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: params.len(),
        });
    }

    let mut positions = Vec::with_capacity(n);
    let mut headings = Vec::with_capacity(n);
    for (i, p) in params.iter().enumerate() {
        let hi = state.headings[i];
        let mut desired = normalized_or_zero(desired_direction(state, p, i));
        if desired == Vector3::zeros() {
            // repulsion vectors cancelled exactly
            desired = hi;
        }

        let noise_angle = if p.noise_sd > 0.0 {
            let normal = Normal::new(0.0, p.noise_sd)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            rng.sample(normal).abs()
        } else {
            0.0
        };
        let axis_seed = Vector3::from(rng.sample::<[f64; 3], _>(UnitSphere));
        if noise_angle > 0.0 {
            let ortho = axis_seed - desired * desired.dot(&axis_seed);
            let axis = if ortho.norm() > 1e-12 {
                ortho.normalize()
            } else {
                any_perpendicular(&desired)
            };
            desired = (desired * noise_angle.cos() + axis * noise_angle.sin()).normalize();
        }

        let max_turn = p.max_turn_rate * p.dt;
        let heading = if angle_between(&hi, &desired) <= max_turn {
            desired
        } else {
            rotate_toward(&hi, &desired, max_turn)
        };
        positions.push(state.positions[i] + heading * (p.speed * p.dt));
        headings.push(heading);
    }

    Ok(CouzinState {
        positions,
        headings,
        step: state.step + 1,
    })
}
