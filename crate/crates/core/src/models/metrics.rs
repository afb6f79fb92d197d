use nalgebra::{Vector2, Vector3};
use serde::Serialize;

use super::{CouzinState, SwarmalatorState};

/// Group order parameters of a heading field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderMetrics {
    /// `|Σ h_i| / N`.
    pub polarization: f64,
    /// `|Σ ĉ_i × h_i| / N`, `ĉ_i` the unit offset from the centroid.
    pub angular_momentum: f64,
}

/// Collective state of the zonal model read off the order parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StateClass {
    Torus,
    Swarming,
    Other,
}

impl StateClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Torus => "torus",
            Self::Swarming => "swarming",
            Self::Other => "other",
        }
    }
}

/// Milling needs at least this much angular momentum.
pub const TORUS_MIN_ANGULAR_MOMENTUM: f64 = 0.6;
/// Upper bound on polarization (and, for swarming, angular momentum) of
/// the unaligned states.
pub const DISORDER_MAX: f64 = 0.35;
pub const ACTIVE_WAVE_MIN_CIRCULAR_VARIANCE: f64 = 0.5;
pub const ACTIVE_WAVE_MIN_ANNULUS_RATIO: f64 = 0.25;

impl OrderMetrics {
    pub fn classify(&self) -> StateClass {
        if self.polarization >= DISORDER_MAX {
            StateClass::Other
        } else if self.angular_momentum > TORUS_MIN_ANGULAR_MOMENTUM {
            StateClass::Torus
        } else if self.angular_momentum < DISORDER_MAX {
            StateClass::Swarming
        } else {
            StateClass::Other
        }
    }
}

pub fn order_metrics(state: &CouzinState) -> OrderMetrics {
    let n = state.positions.len() as f64;
    let centroid = state.positions.iter().sum::<Vector3<f64>>() / n;
    let heading_sum: Vector3<f64> = state.headings.iter().sum();
    let mut rotation = Vector3::zeros();
    for (x, h) in state.positions.iter().zip(&state.headings) {
        let offset = x - centroid;
        let r = offset.norm();
        if r > 0.0 {
            rotation += (offset / r).cross(h);
        }
    }
    OrderMetrics {
        polarization: heading_sum.norm() / n,
        angular_momentum: rotation.norm() / n,
    }
}

/// Shape diagnostics for the swarmalator active-wave state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwarmalatorDiagnostics {
    /// `1 - |mean exp(iθ)|`.
    pub circular_variance: f64,
    /// 10th over 90th percentile of distance to the centroid.
    pub annulus_ratio: f64,
}

impl SwarmalatorDiagnostics {
    /// Phases spread out and agents on a ring around an empty core.
    pub fn is_active_wave(&self) -> bool {
        self.circular_variance > ACTIVE_WAVE_MIN_CIRCULAR_VARIANCE
            && self.annulus_ratio > ACTIVE_WAVE_MIN_ANNULUS_RATIO
    }
}

pub fn swarmalator_diagnostics(state: &SwarmalatorState) -> SwarmalatorDiagnostics {
    let n = state.positions.len();
    let (s, c) = state
        .phases
        .iter()
        .fold((0.0, 0.0), |(s, c), t| (s + t.sin(), c + t.cos()));
    let resultant = (s * s + c * c).sqrt() / n as f64;

    let centroid = state.positions.iter().sum::<Vector2<f64>>() / n as f64;
    let mut radii: Vec<f64> = state.positions.iter().map(|x| (x - centroid).norm()).collect();
    radii.sort_by(f64::total_cmp);
    let p90 = percentile(&radii, 0.9);
    SwarmalatorDiagnostics {
        circular_variance: 1.0 - resultant,
        annulus_ratio: if p90 > 0.0 { percentile(&radii, 0.1) / p90 } else { 0.0 },
    }
}

/// Linear-interpolation percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
