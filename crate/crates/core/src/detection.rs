//! Out-of-band-power (OOBP) and local-graph-smoothness (LGS) detectors.
//!
//! Both detectors filter a graph signal, take the squared norm of each
//! agent's filtered row, and sum that energy over snapshots. OOBP uses an
//! indicator response on spectral indices nominal swarms rarely occupy;
//! LGS uses `H = Λ`, i.e. applies the normalized Laplacian.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{CouzinParams, ModelKind, SwarmalatorParams};
use crate::spectral::{apply_filter, FilterSpec, GraphSignal, SignalKind, SpectralBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Oobp,
    Lgs,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Oobp, Method::Lgs];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Oobp => "oobp",
            Self::Lgs => "lgs",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "oobp" => Ok(Self::Oobp),
            "lgs" => Ok(Self::Lgs),
            other => Err(format!("unknown method '{other}' (expected oobp or lgs)")),
        }
    }
}

/// Whether anomalous agents are expected to score high or low.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    High,
    Low,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Self::High => 1.0,
            Self::Low => -1.0,
        }
    }
}

/// Per-agent parameters for one model family.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum CaseParams {
    Couzin {
        nominal: CouzinParams,
        /// One entry per anomaly variant; each run draws one uniformly.
        anomalies: Vec<CouzinParams>,
    },
    Swarmalator {
        nominal: SwarmalatorParams,
        anomalies: Vec<SwarmalatorParams>,
    },
}

impl CaseParams {
    pub fn model(&self) -> ModelKind {
        match self {
            Self::Couzin { .. } => ModelKind::Couzin,
            Self::Swarmalator { .. } => ModelKind::Swarmalator,
        }
    }

    pub fn n_variants(&self) -> usize {
        match self {
            Self::Couzin { anomalies, .. } => anomalies.len(),
            Self::Swarmalator { anomalies, .. } => anomalies.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Couzin { nominal, anomalies } => {
                nominal.validate()?;
                anomalies.iter().try_for_each(CouzinParams::validate)?;
            }
            Self::Swarmalator { nominal, anomalies } => {
                nominal.validate()?;
                anomalies.iter().try_for_each(SwarmalatorParams::validate)?;
            }
        }
        if self.n_variants() == 0 {
            return Err(Error::InvalidParameter("a case needs at least one anomaly variant".into()));
        }
        Ok(())
    }

    /// The same case with every anomaly replaced by the nominal parameters.
    pub fn null(&self) -> Self {
        match self {
            Self::Couzin { nominal, .. } => Self::Couzin {
                nominal: *nominal,
                anomalies: vec![*nominal],
            },
            Self::Swarmalator { nominal, .. } => Self::Swarmalator {
                nominal: *nominal,
                anomalies: vec![*nominal],
            },
        }
    }
}

/// A fully specified detection scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseSpec {
    pub case_id: u8,
    pub params: CaseParams,
    pub signal_kind: SignalKind,
    pub oobp_filter: FilterSpec,
    pub lgs_direction: Direction,
}

impl CaseSpec {
    pub fn model(&self) -> ModelKind {
        self.params.model()
    }

    pub fn filter(&self, method: Method) -> &FilterSpec {
        match method {
            Method::Oobp => &self.oobp_filter,
            Method::Lgs => &FilterSpec::Lgs,
        }
    }

    pub fn direction(&self, method: Method) -> Direction {
        match method {
            Method::Oobp => Direction::High,
            Method::Lgs => self.lgs_direction,
        }
    }
}

/// Default LGS orientation: low-frequency anomalies (case 4) score low.
pub fn case_lgs_direction(case_id: u8) -> Result<Direction> {
    match case_id {
        4 => Ok(Direction::Low),
        1..=5 => Ok(Direction::High),
        other => Err(Error::UnknownCase(other)),
    }
}

/// Default signal for each case.
pub fn case_signal_kind(case_id: u8) -> Result<SignalKind> {
    match case_id {
        1 | 2 => Ok(SignalKind::AdjustedPosition),
        3 | 4 => Ok(SignalKind::NormalizedVelocity),
        5 => Ok(SignalKind::PhaseComplex),
        other => Err(Error::UnknownCase(other)),
    }
}

/// Default filter of each case, with 1-based pass sets:
///
/// | case | OOBP pass set |
/// |------|---------------|
/// | 1    | {5, …, N}     |
/// | 2, 3 | {4, …, N}     |
/// | 4    | {1, …, 6}     |
/// | 5    | {1} ∪ {4, …, N} |
///
/// LGS is the same for every case.
pub fn case_filter_spec(case_id: u8, method: Method, n: usize) -> Result<FilterSpec> {
    if !(1..=5).contains(&case_id) {
        return Err(Error::UnknownCase(case_id));
    }
    if method == Method::Lgs {
        return Ok(FilterSpec::Lgs);
    }
    if n < 6 {
        return Err(Error::IndexOutOfRange { index: 6, n });
    }
    let filter = match case_id {
        1 => FilterSpec::indicator(5..=n)?,
        2 | 3 => FilterSpec::indicator(4..=n)?,
        4 => FilterSpec::indicator(1..=6)?,
        _ => FilterSpec::indicator(std::iter::once(1).chain(4..=n))?,
    };
    Ok(filter)
}

/// `‖g_i‖²` for every agent, `g` the filtered signal.
pub fn per_agent_statistic(
    basis: &SpectralBasis,
    filter: &FilterSpec,
    signal: &GraphSignal,
) -> Result<Vec<f64>> {
    Ok(apply_filter(basis, filter, signal)?.row_sq_norms())
}

/// Snapshot-summed filtered energy. Entries stay nonnegative; the
/// direction only affects [`AgentScores::oriented`] and the ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentScores {
    pub accumulated: Vec<f64>,
    pub snapshots_used: usize,
    pub method: Method,
    pub direction: Direction,
}

impl AgentScores {
    /// Scores multiplied by the direction sign, larger is more anomalous.
    pub fn oriented(&self) -> Vec<f64> {
        let s = self.direction.sign();
        self.accumulated.iter().map(|v| s * v).collect()
    }

    /// Agent indices from most to least anomalous. Ties keep index order.
    pub fn ranking(&self) -> Vec<usize> {
        let oriented = self.oriented();
        let mut idx: Vec<usize> = (0..oriented.len()).collect();
        idx.sort_by(|&a, &b| oriented[b].total_cmp(&oriented[a]));
        idx
    }
}

pub fn accumulate_scores(
    snapshot_stats: &[Vec<f64>],
    method: Method,
    direction: Direction,
) -> Result<AgentScores> {
    let first = snapshot_stats.first().ok_or(Error::EmptyInput)?;
    let mut accumulated = vec![0.0; first.len()];
    for stats in snapshot_stats {
        if stats.len() != accumulated.len() {
            return Err(Error::DimensionMismatch {
                expected: accumulated.len(),
                actual: stats.len(),
            });
        }
        for (acc, v) in accumulated.iter_mut().zip(stats) {
            *acc += v;
        }
    }
    Ok(AgentScores {
        accumulated,
        snapshots_used: snapshot_stats.len(),
        method,
        direction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn pass(f: &FilterSpec) -> Vec<usize> {
        match f {
            FilterSpec::Indicator { pass } => pass.iter().copied().collect(),
            FilterSpec::Lgs => panic!("expected indicator"),
        }
    }

    #[test]
    fn case_pass_sets() {
        assert_eq!(pass(&case_filter_spec(1, Method::Oobp, 100).unwrap()), (5..=100).collect::<Vec<_>>());
        assert_eq!(pass(&case_filter_spec(2, Method::Oobp, 100).unwrap()), (4..=100).collect::<Vec<_>>());
        assert_eq!(pass(&case_filter_spec(3, Method::Oobp, 100).unwrap()), (4..=100).collect::<Vec<_>>());
        assert_eq!(pass(&case_filter_spec(4, Method::Oobp, 100).unwrap()), (1..=6).collect::<Vec<_>>());
        let mut five = vec![1];
        five.extend(4..=200);
        assert_eq!(pass(&case_filter_spec(5, Method::Oobp, 200).unwrap()), five);
    }

    #[test]
    fn lgs_overrides_case() {
        for case in 1..=5 {
            assert_eq!(case_filter_spec(case, Method::Lgs, 17).unwrap(), FilterSpec::Lgs);
        }
    }

    #[test]
    fn unknown_case() {
        assert_eq!(case_filter_spec(9, Method::Oobp, 100).unwrap_err(), Error::UnknownCase(9));
        assert_eq!(case_filter_spec(0, Method::Lgs, 100).unwrap_err(), Error::UnknownCase(0));
        assert!(case_lgs_direction(6).is_err());
    }

    #[test]
    fn only_case_four_flips_lgs() {
        for case in 1..=5 {
            let want = if case == 4 { Direction::Low } else { Direction::High };
            assert_eq!(case_lgs_direction(case).unwrap(), want);
        }
    }

    #[test]
    fn identity_filter_statistic_is_row_norm() {
        let basis = crate::spectral::eigendecompose(&DMatrix::from_row_slice(
            3,
            3,
            &[1.0, -0.5, -0.5, -0.5, 1.0, -0.5, -0.5, -0.5, 1.0],
        ))
        .unwrap();
        let f = GraphSignal::real(
            SignalKind::Raw,
            DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 2.0, 3.0, 0.0]),
        );
        let stat = per_agent_statistic(&basis, &FilterSpec::indicator(1..=3).unwrap(), &f).unwrap();
        for (s, want) in stat.iter().zip([1.0, 4.0, 9.0]) {
            assert!((s - want).abs() < 1e-12);
        }
    }

    #[test]
    fn accumulation() {
        let one = vec![1.0, 0.5, 2.0];
        let s = accumulate_scores(&[one.clone()], Method::Oobp, Direction::High).unwrap();
        assert_eq!(s.accumulated, one);
        let s = accumulate_scores(&vec![one.clone(); 4], Method::Lgs, Direction::High).unwrap();
        assert_eq!(s.accumulated, vec![4.0, 2.0, 8.0]);
        assert_eq!(s.snapshots_used, 4);
        assert_eq!(
            accumulate_scores(&[], Method::Oobp, Direction::High).unwrap_err(),
            Error::EmptyInput
        );
        assert!(accumulate_scores(&[one, vec![1.0]], Method::Oobp, Direction::High).is_err());
    }

    #[test]
    fn low_direction_reverses_ranking() {
        let stats = vec![vec![0.3, 5.0, 1.0, 2.5]];
        let high = accumulate_scores(&stats, Method::Lgs, Direction::High).unwrap();
        let low = accumulate_scores(&stats, Method::Lgs, Direction::Low).unwrap();
        let mut rev = high.ranking();
        rev.reverse();
        assert_eq!(low.ranking(), rev);
        assert_eq!(high.ranking(), vec![1, 3, 2, 0]);
        assert!(low.accumulated.iter().all(|&v| v >= 0.0));
    }
}
