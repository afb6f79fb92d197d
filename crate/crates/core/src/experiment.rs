//! Monte-Carlo ensembles: simulate, take snapshots, accumulate detector
//! scores, and reduce them to AUC-versus-snapshot curves.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bridge::{build_swarm_graph, extract_signal};
use crate::detection::{per_agent_statistic, CaseParams, CaseSpec, Method};
use crate::error::{Error, Result};
use crate::models::{
    couzin_step, dynamics_rng, init_swarm, swarmalator_step, CouzinParams, SimRng, SwarmState,
    SwarmalatorParams,
};
use crate::roc::auc;
use crate::spectral::SpectralBasis;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub runs: usize,
    pub burn_in_steps: usize,
    pub snapshot_interval: usize,
    pub max_snapshots: usize,
    pub n_agents: usize,
    pub anomalous_index: usize,
    pub base_seed: u64,
    /// Side of the cube (or square) initial positions are drawn from.
    pub spatial_extent: f64,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidParameter(m));
        if self.runs == 0 {
            return fail("runs must be at least 1".into());
        }
        if self.snapshot_interval == 0 || self.max_snapshots == 0 {
            return fail("snapshot_interval and max_snapshots must be positive".into());
        }
        if self.n_agents < 2 {
            return fail(format!("n_agents must be at least 2, got {}", self.n_agents));
        }
        if self.anomalous_index >= self.n_agents {
            return fail(format!(
                "anomalous_index {} must be below n_agents {}",
                self.anomalous_index, self.n_agents
            ));
        }
        if !(self.spatial_extent > 0.0) {
            return fail("spatial_extent must be positive".into());
        }
        Ok(())
    }

    pub fn seed(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }
}

/// Cumulative scores of one successful run: `cumulative[method][k - 1][agent]`
/// is the agent's energy summed over the first `k` snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct RunScores {
    pub cumulative: BTreeMap<Method, Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: usize,
    pub seed: u64,
    /// Index into the case's anomaly variants.
    pub variant: usize,
    pub outcome: std::result::Result<RunScores, String>,
}

/// Output of [`run_case`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub case: CaseSpec,
    pub config: ExperimentConfig,
    pub methods: Vec<Method>,
    pub runs: Vec<RunRecord>,
}

impl ScoreTable {
    pub fn successful(&self) -> impl Iterator<Item = (&RunRecord, &RunScores)> {
        self.runs
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|s| (r, s)))
    }

    pub fn failures(&self) -> impl Iterator<Item = (usize, &str)> {
        self.runs
            .iter()
            .filter_map(|r| r.outcome.as_ref().err().map(|e| (r.run_id, e.as_str())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocCurvePoint {
    pub case_id: u8,
    pub method: Method,
    pub num_snapshots: usize,
    pub auc: f64,
    pub n_runs: usize,
}

/// Per-agent parameters with the anomalous slot replaced.
fn agent_params<P: Copy>(nominal: P, anomaly: P, n: usize, anomalous: usize) -> Vec<P> {
    let mut params = vec![nominal; n];
    params[anomalous] = anomaly;
    params
}

enum Stepper {
    Couzin(Vec<CouzinParams>),
    Swarmalator(Vec<SwarmalatorParams>),
}

impl Stepper {
    fn advance(&self, state: SwarmState, steps: usize, rng: &mut SimRng) -> Result<SwarmState> {
        match (self, state) {
            (Self::Couzin(p), SwarmState::Couzin(mut s)) => {
                for _ in 0..steps {
                    s = couzin_step(&s, p, rng)?;
                }
                Ok(SwarmState::Couzin(s))
            }
            (Self::Swarmalator(p), SwarmState::Swarmalator(mut s)) => {
                for _ in 0..steps {
                    s = swarmalator_step(&s, p)?;
                }
                Ok(SwarmState::Swarmalator(s))
            }
            _ => Err(Error::WrongModel("state does not match the case model")),
        }
    }
}

/// Per-agent statistic of each method at one time instant.
pub fn snapshot_statistics(
    case: &CaseSpec,
    state: &SwarmState,
    methods: &[Method],
) -> Result<Vec<Vec<f64>>> {
    let graph = build_swarm_graph(&state.positions())?;
    let basis = SpectralBasis::of_graph(&graph)?;
    let signal = extract_signal(state, case.signal_kind)?;
    methods
        .iter()
        .map(|&m| per_agent_statistic(&basis, case.filter(m), &signal))
        .collect()
}

fn run_once(case: &CaseSpec, cfg: &ExperimentConfig, methods: &[Method], run_id: usize) -> RunRecord {
    let seed = cfg.seed(run_id);
    let mut rng = dynamics_rng(seed);
    let n_variants = case.params.n_variants();
    let variant = if n_variants > 1 {
        rng.gen_range(0..n_variants)
    } else {
        0
    };
    let outcome = simulate_and_score(case, cfg, methods, seed, variant, &mut rng)
        .map_err(|e| e.to_string());
    RunRecord {
        run_id,
        seed,
        variant,
        outcome,
    }
}

fn simulate_and_score(
    case: &CaseSpec,
    cfg: &ExperimentConfig,
    methods: &[Method],
    seed: u64,
    variant: usize,
    rng: &mut SimRng,
) -> Result<RunScores> {
    let n = cfg.n_agents;
    let stepper = match &case.params {
        CaseParams::Couzin { nominal, anomalies } => {
            Stepper::Couzin(agent_params(*nominal, anomalies[variant], n, cfg.anomalous_index))
        }
        CaseParams::Swarmalator { nominal, anomalies } => Stepper::Swarmalator(agent_params(
            *nominal,
            anomalies[variant],
            n,
            cfg.anomalous_index,
        )),
    };

    let mut state = init_swarm(case.model(), n, seed, cfg.spatial_extent);
    state = stepper.advance(state, cfg.burn_in_steps, rng)?;

    let mut cumulative: BTreeMap<Method, Vec<Vec<f64>>> =
        methods.iter().map(|&m| (m, Vec::with_capacity(cfg.max_snapshots))).collect();
    for _ in 0..cfg.max_snapshots {
        state = stepper.advance(state, cfg.snapshot_interval, rng)?;
        let stats = snapshot_statistics(case, &state, methods)?;
        for (m, stat) in methods.iter().zip(stats) {
            let series = cumulative.get_mut(m).expect("method registered above");
            let next = match series.last() {
                Some(prev) => prev.iter().zip(&stat).map(|(a, b)| a + b).collect(),
                None => stat,
            };
            series.push(next);
        }
    }
    Ok(RunScores { cumulative })
}

/// Runs the Monte-Carlo ensemble of one case.
///
/// Run `r` uses seed `base_seed + r`. A failing run is recorded with its
/// error and excluded downstream; it never aborts the ensemble.
pub fn run_case(case: &CaseSpec, cfg: &ExperimentConfig, methods: &[Method]) -> Result<ScoreTable> {
    cfg.validate()?;
    case.params.validate()?;
    for &m in methods {
        case.filter(m).validate(cfg.n_agents)?;
    }
    if methods.is_empty() {
        return Err(Error::InvalidParameter("no detection method selected".into()));
    }

    let job = || -> Vec<RunRecord> {
        (0..cfg.runs)
            .into_par_iter()
            .map(|r| run_once(case, cfg, methods, r))
            .collect()
    };
    let runs = if cfg.workers == 0 {
        job()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?
            .install(job)
    };

    Ok(ScoreTable {
        case: case.clone(),
        config: cfg.clone(),
        methods: methods.to_vec(),
        runs,
    })
}

fn pooled_auc<'a>(
    runs: impl Iterator<Item = &'a RunScores>,
    method: Method,
    k: usize,
    sign: f64,
    anomalous: usize,
) -> Option<(f64, usize)> {
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    let mut n_runs = 0;
    for run in runs {
        let cumulative = run.cumulative.get(&method)?;
        let at_k = cumulative.get(k - 1)?;
        scores.extend(at_k.iter().map(|s| sign * s));
        labels.extend((0..at_k.len()).map(|a| a == anomalous));
        n_runs += 1;
    }
    auc(&scores, &labels).ok().map(|a| (a, n_runs))
}

/// Pooled AUC for every method and snapshot count `1..=max_snapshots`.
pub fn auc_vs_snapshots(table: &ScoreTable) -> Vec<RocCurvePoint> {
    curve(table, |_| true)
}

/// The same curves restricted to runs that drew anomaly variant `variant`.
pub fn auc_vs_snapshots_for_variant(table: &ScoreTable, variant: usize) -> Vec<RocCurvePoint> {
    curve(table, |r| r.variant == variant)
}

fn curve(table: &ScoreTable, keep: impl Fn(&RunRecord) -> bool) -> Vec<RocCurvePoint> {
    let mut points = Vec::new();
    for &method in &table.methods {
        let sign = table.case.direction(method).sign();
        for k in 1..=table.config.max_snapshots {
            let runs = table.successful().filter(|(r, _)| keep(r)).map(|(_, s)| s);
            if let Some((auc, n_runs)) =
                pooled_auc(runs, method, k, sign, table.config.anomalous_index)
            {
                points.push(RocCurvePoint {
                    case_id: table.case.case_id,
                    method,
                    num_snapshots: k,
                    auc,
                    n_runs,
                });
            }
        }
    }
    points
}
