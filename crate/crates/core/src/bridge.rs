//! From swarm states to graphs and graph signals.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::models::SwarmState;
use crate::spectral::{GraphSignal, SignalKind, WeightedGraph};

/// Complete Gaussian-kernel graph over agent positions (`N × dim`).
///
/// `A_jk = exp(-|x_j - x_k|² / σ²)` with `σ²` the mean squared distance
/// over ordered pairs `j ≠ k`. Scaling every position by the same factor
/// leaves the adjacency unchanged.
pub fn build_swarm_graph(positions: &DMatrix<f64>) -> Result<WeightedGraph> {
    let n = positions.nrows();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "a swarm graph needs at least 2 agents, got {n}"
        )));
    }
    if positions.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("positions must be finite".into()));
    }

    let mut dist_sq = DMatrix::zeros(n, n);
    let mut total = 0.0;
    for j in 0..n {
        for k in (j + 1)..n {
            let d = (positions.row(j) - positions.row(k)).norm_squared();
            dist_sq[(j, k)] = d;
            dist_sq[(k, j)] = d;
            total += d;
        }
    }
    // each unordered pair appears twice among ordered pairs
    let bandwidth_sq = 2.0 * total / (n * (n - 1)) as f64;
    if bandwidth_sq <= 0.0 {
        return Err(Error::DegeneratePositions);
    }

    let adjacency = DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            0.0
        } else {
            (-dist_sq[(j, k)] / bandwidth_sq).exp()
        }
    });
    WeightedGraph::new(adjacency, bandwidth_sq)
}

/// Extracts one of the per-agent signals from a state.
///
/// `NormalizedVelocity` is `v_j / |v_j|²`, which has norm `1/|v_j|`; for
/// constant-speed agents it is the unit heading up to a global factor.
pub fn extract_signal(state: &SwarmState, kind: SignalKind) -> Result<GraphSignal> {
    match kind {
        SignalKind::AdjustedPosition => {
            let mut x = state.positions();
            let mean = x.row_mean();
            for mut row in x.row_iter_mut() {
                row -= &mean;
            }
            Ok(GraphSignal::real(kind, x))
        }
        SignalKind::NormalizedVelocity => {
            let mut v = state.velocities();
            for (agent, mut row) in v.row_iter_mut().enumerate() {
                let sq = row.norm_squared();
                if sq == 0.0 {
                    return Err(Error::ZeroVelocity { agent });
                }
                row /= sq;
            }
            Ok(GraphSignal::real(kind, v))
        }
        SignalKind::PhaseComplex => state
            .phases()
            .map(GraphSignal::from_phases)
            .ok_or(Error::SignalUnavailable { kind: kind.as_str() }),
        SignalKind::Raw => Err(Error::SignalUnavailable { kind: kind.as_str() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CouzinState, SwarmalatorState};
    use approx::assert_abs_diff_eq;
    use nalgebra::{Vector2, Vector3};
    use std::f64::consts::PI;

    #[test]
    fn two_agents_weight_is_e_inverse() {
        for d in [0.1, 1.0, 37.0] {
            let g = build_swarm_graph(&DMatrix::from_row_slice(2, 2, &[0.0, 0.0, d, 0.0])).unwrap();
            assert_abs_diff_eq!(g.bandwidth_sq(), d * d, epsilon = 1e-12 * d * d);
            assert_abs_diff_eq!(g.adjacency()[(0, 1)], (-1.0f64).exp(), epsilon = 1e-15);
        }
    }

    #[test]
    fn equilateral_triangle() {
        let s = 2.5;
        let h = s * 3f64.sqrt() / 2.0;
        let x = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, s, 0.0, s / 2.0, h]);
        let g = build_swarm_graph(&x).unwrap();
        assert_abs_diff_eq!(g.bandwidth_sq(), s * s, epsilon = 1e-12);
        for j in 0..3 {
            for k in 0..3 {
                let want = if j == k { 0.0 } else { (-1.0f64).exp() };
                assert_abs_diff_eq!(g.adjacency()[(j, k)], want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn coincident_positions_rejected() {
        let x = DMatrix::from_element(4, 3, 1.5);
        assert_eq!(build_swarm_graph(&x).unwrap_err(), Error::DegeneratePositions);
    }

    #[test]
    fn signals_from_couzin_state() {
        let state = SwarmState::Couzin(CouzinState {
            positions: vec![Vector3::new(1.0, 2.0, 3.0), Vector3::new(3.0, 2.0, 1.0)],
            headings: vec![Vector3::x() * 3.0, Vector3::y() * 3.0],
            step: 0,
        });
        let r = extract_signal(&state, SignalKind::AdjustedPosition).unwrap();
        assert_abs_diff_eq!(r.re().row(0).sum() + r.re().row(1).sum(), 0.0, epsilon = 1e-12);
        let u = extract_signal(&state, SignalKind::NormalizedVelocity).unwrap();
        for n in u.row_sq_norms() {
            assert_abs_diff_eq!(n.sqrt(), 1.0 / 3.0, epsilon = 1e-15);
        }
        assert!(extract_signal(&state, SignalKind::PhaseComplex).is_err());
    }

    #[test]
    fn phase_signal_on_unit_circle() {
        let state = SwarmState::Swarmalator(SwarmalatorState {
            positions: vec![Vector2::zeros(); 3],
            velocities: vec![Vector2::zeros(); 3],
            phases: vec![0.0, PI / 2.0, PI],
            step: 0,
        });
        let h = extract_signal(&state, SignalKind::PhaseComplex).unwrap();
        let (re, im) = (h.re(), h.im().unwrap());
        let want = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)];
        for (j, (wr, wi)) in want.into_iter().enumerate() {
            assert_abs_diff_eq!(re[(j, 0)], wr, epsilon = 1e-15);
            assert_abs_diff_eq!(im[(j, 0)], wi, epsilon = 1e-15);
        }
        assert_eq!(
            extract_signal(&state, SignalKind::NormalizedVelocity).unwrap_err(),
            Error::ZeroVelocity { agent: 0 }
        );
    }
}
