//! Agent-based swarm simulators: the 3D zonal (Couzin) model and the 2D
//! swarmalator model. Both are synchronous, state-to-state maps.

mod couzin;
mod metrics;
mod swarmalator;

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::UnitSphere;
use serde::{Deserialize, Serialize};

pub use couzin::{couzin_step, CouzinParams};
pub use metrics::{
    order_metrics, swarmalator_diagnostics, OrderMetrics, StateClass, SwarmalatorDiagnostics,
    ACTIVE_WAVE_MIN_ANNULUS_RATIO, ACTIVE_WAVE_MIN_CIRCULAR_VARIANCE, DISORDER_MAX,
    TORUS_MIN_ANGULAR_MOMENTUM,
};
pub use swarmalator::{swarmalator_step, SwarmalatorParams};

/// Seeded generator used everywhere a simulation needs randomness.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for run-time noise; a separate stream from the one
/// [`init_swarm`] draws the initial state from.
pub fn dynamics_rng(seed: u64) -> SimRng {
    let mut rng = rng_from_seed(seed);
    rng.set_stream(1);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Couzin,
    Swarmalator,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Couzin => "couzin",
            Self::Swarmalator => "swarmalator",
        }
    }

    /// Spatial dimension the model runs in.
    pub fn dim(self) -> usize {
        match self {
            Self::Couzin => 3,
            Self::Swarmalator => 2,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "couzin" => Ok(Self::Couzin),
            "swarmalator" => Ok(Self::Swarmalator),
            other => Err(format!("unknown model '{other}' (expected couzin or swarmalator)")),
        }
    }
}

/// Couzin agents: 3D positions and unit headings.
#[derive(Debug, Clone, PartialEq)]
pub struct CouzinState {
    pub positions: Vec<Vector3<f64>>,
    pub headings: Vec<Vector3<f64>>,
    pub step: u64,
}

/// Swarmalators: 2D positions, last computed velocity `dx/dt`, phases in
/// `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmalatorState {
    pub positions: Vec<Vector2<f64>>,
    pub velocities: Vec<Vector2<f64>>,
    pub phases: Vec<f64>,
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SwarmState {
    Couzin(CouzinState),
    Swarmalator(SwarmalatorState),
}

impl SwarmState {
    pub fn model(&self) -> ModelKind {
        match self {
            Self::Couzin(_) => ModelKind::Couzin,
            Self::Swarmalator(_) => ModelKind::Swarmalator,
        }
    }

    pub fn n_agents(&self) -> usize {
        match self {
            Self::Couzin(s) => s.positions.len(),
            Self::Swarmalator(s) => s.positions.len(),
        }
    }

    pub fn step(&self) -> u64 {
        match self {
            Self::Couzin(s) => s.step,
            Self::Swarmalator(s) => s.step,
        }
    }

    /// Positions as an `N × dim` matrix.
    pub fn positions(&self) -> DMatrix<f64> {
        match self {
            Self::Couzin(s) => rows_to_matrix(s.positions.iter().map(|p| p.as_slice()), 3),
            Self::Swarmalator(s) => rows_to_matrix(s.positions.iter().map(|p| p.as_slice()), 2),
        }
    }

    /// Headings (Couzin) or velocities (swarmalator) as an `N × dim` matrix.
    pub fn velocities(&self) -> DMatrix<f64> {
        match self {
            Self::Couzin(s) => rows_to_matrix(s.headings.iter().map(|p| p.as_slice()), 3),
            Self::Swarmalator(s) => rows_to_matrix(s.velocities.iter().map(|p| p.as_slice()), 2),
        }
    }

    pub fn phases(&self) -> Option<&[f64]> {
        match self {
            Self::Couzin(_) => None,
            Self::Swarmalator(s) => Some(&s.phases),
        }
    }
}

fn rows_to_matrix<'a>(rows: impl Iterator<Item = &'a [f64]>, dim: usize) -> DMatrix<f64> {
    let flat: Vec<f64> = rows.flat_map(|r| r.iter().copied()).collect();
    DMatrix::from_row_slice(flat.len() / dim, dim, &flat)
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_phase(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Random initial state: positions uniform in a centred cube (or square)
/// of side `extent`, headings uniform on the sphere (or circle), phases
/// uniform in `[0, 2π)`.
pub fn init_swarm(model: ModelKind, n: usize, seed: u64, extent: f64) -> SwarmState {
    let mut rng = rng_from_seed(seed);
    let half = extent / 2.0;
    match model {
        ModelKind::Couzin => {
            let positions = (0..n)
                .map(|_| Vector3::from_fn(|_, _| rng.gen_range(-half..=half)))
                .collect();
            let headings = (0..n)
                .map(|_| Vector3::from(rng.sample::<[f64; 3], _>(UnitSphere)).normalize())
                .collect();
            SwarmState::Couzin(CouzinState {
                positions,
                headings,
                step: 0,
            })
        }
        ModelKind::Swarmalator => {
            let positions = (0..n)
                .map(|_| Vector2::from_fn(|_, _| rng.gen_range(-half..=half)))
                .collect();
            let phases = (0..n).map(|_| wrap_phase(rng.gen_range(0.0..TAU))).collect();
            SwarmState::Swarmalator(SwarmalatorState {
                positions,
                velocities: vec![Vector2::zeros(); n],
                phases,
                step: 0,
            })
        }
    }
}
