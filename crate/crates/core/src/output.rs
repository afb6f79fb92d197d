//! CSV and JSON artifacts. Floats are written with 17 significant digits
//! so files round-trip exactly and compare byte-for-byte across reruns.

use std::io::Write;

use nalgebra::DVector;
use serde::Serialize;

use crate::detection::{AgentScores, CaseParams};
use crate::experiment::{RocCurvePoint, ScoreTable};
use crate::models::SwarmState;

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(out)
}

/// `index,eigenvalue,power`, 1-based index.
pub fn write_spectrum<W: Write>(
    out: W,
    eigenvalues: &DVector<f64>,
    power: &DVector<f64>,
) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(["index", "eigenvalue", "power"])?;
    for (i, (l, p)) in eigenvalues.iter().zip(power.iter()).enumerate() {
        w.write_record([(i + 1).to_string(), fmt_float(*l), fmt_float(*p)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn trajectory_header(state: &SwarmState) -> Vec<&'static str> {
    let mut h = vec!["step", "agent_id"];
    match state {
        SwarmState::Couzin(_) => h.extend(["x", "y", "z", "hx", "hy", "hz"]),
        SwarmState::Swarmalator(_) => h.extend(["x", "y", "hx", "hy", "phase"]),
    }
    h
}

/// Streams trajectory rows. Couzin rows carry unit headings; swarmalator
/// rows carry the velocity `dx/dt` in the `h` columns plus the phase.
pub struct TrajectoryWriter<W: Write> {
    inner: csv::Writer<W>,
    header_written: bool,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(out: W) -> Self {
        Self {
            inner: writer(out),
            header_written: false,
        }
    }

    pub fn write_state(&mut self, state: &SwarmState) -> csv::Result<()> {
        if !self.header_written {
            self.inner.write_record(trajectory_header(state))?;
            self.header_written = true;
        }
        let step = state.step().to_string();
        let x = state.positions();
        let v = state.velocities();
        for agent in 0..state.n_agents() {
            let mut row = vec![step.clone(), agent.to_string()];
            row.extend(x.row(agent).iter().map(|c| fmt_float(*c)));
            row.extend(v.row(agent).iter().map(|c| fmt_float(*c)));
            if let Some(phases) = state.phases() {
                row.push(fmt_float(phases[agent]));
            }
            self.inner.write_record(&row)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> csv::Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// `run_id,agent_id,is_anomalous,method,snapshots_used,score` for single
/// detections.
pub fn write_agent_scores<W: Write>(
    out: W,
    run_id: usize,
    anomalous: usize,
    scores: &[AgentScores],
) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(["run_id", "agent_id", "is_anomalous", "method", "snapshots_used", "score"])?;
    for s in scores {
        for (agent, v) in s.accumulated.iter().enumerate() {
            w.write_record([
                run_id.to_string(),
                agent.to_string(),
                (agent == anomalous).to_string(),
                s.method.to_string(),
                s.snapshots_used.to_string(),
                fmt_float(*v),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `run_id,agent_id,is_anomalous,method,snapshots,cumulative_score` for
/// every successful run and every snapshot-count prefix.
pub fn write_score_table<W: Write>(out: W, table: &ScoreTable) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record([
        "run_id",
        "agent_id",
        "is_anomalous",
        "method",
        "snapshots",
        "cumulative_score",
    ])?;
    let anomalous = table.config.anomalous_index;
    for (run, scores) in table.successful() {
        for (method, series) in &scores.cumulative {
            for (k, at_k) in series.iter().enumerate() {
                for (agent, v) in at_k.iter().enumerate() {
                    w.write_record([
                        run.run_id.to_string(),
                        agent.to_string(),
                        (agent == anomalous).to_string(),
                        method.to_string(),
                        (k + 1).to_string(),
                        fmt_float(*v),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// `case_id,method,snapshots,auc,n_runs`.
pub fn write_curves<W: Write>(out: W, points: &[RocCurvePoint]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(["case_id", "method", "snapshots", "auc", "n_runs"])?;
    for p in points {
        w.write_record([
            p.case_id.to_string(),
            p.method.to_string(),
            p.num_snapshots.to_string(),
            fmt_float(p.auc),
            p.n_runs.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Label of an anomaly variant for per-variant breakdowns.
pub fn variant_label(params: &CaseParams, variant: usize) -> String {
    match params {
        CaseParams::Couzin { .. } => format!("variant{variant}"),
        CaseParams::Swarmalator { anomalies, .. } => format!("K={}", anomalies[variant].k),
    }
}

/// `case_id,variant,label,method,snapshots,auc,n_runs`.
pub fn write_variant_curves<W: Write>(
    out: W,
    params: &CaseParams,
    curves: &[(usize, Vec<RocCurvePoint>)],
) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(["case_id", "variant", "label", "method", "snapshots", "auc", "n_runs"])?;
    for (variant, points) in curves {
        for p in points {
            w.write_record([
                p.case_id.to_string(),
                variant.to_string(),
                variant_label(params, *variant),
                p.method.to_string(),
                p.num_snapshots.to_string(),
                fmt_float(p.auc),
                p.n_runs.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Written next to every CLI output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: Vec<String>,
    /// Fully resolved configuration; feed it back with `--config` to
    /// reproduce the outputs.
    pub config_echo: String,
    pub seeds: Vec<u64>,
    pub outputs: Vec<String>,
    pub wall_time_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<serde_json::Value>,
    pub failures: Vec<RunFailure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunFailure {
    pub run_id: usize,
    pub error: String,
}
