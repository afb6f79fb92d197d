//! Layered TOML configuration: shipped defaults, then an optional user
//! file, then `SWARMGSP__<SECTION>__<KEY>` environment variables.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Value;

use crate::detection::{CaseParams, CaseSpec, Direction};
use crate::experiment::ExperimentConfig;
use crate::models::{CouzinParams, ModelKind, SwarmalatorParams};
use crate::spectral::{FilterSpec, SignalKind};

/// The configuration shipped with the crate.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

/// Prefix of environment variables that override config keys. Nested keys
/// are joined with `__`, e.g. `SWARMGSP__EXPERIMENT__RUNS=10` or
/// `SWARMGSP__CASE1__ANOMALY__R_REPULSION=1.2`.
pub const ENV_PREFIX: &str = "SWARMGSP__";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid TOML in {origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: impl Into<String>, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollectiveState {
    Swarming,
    Torus,
}

impl std::str::FromStr for CollectiveState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "swarming" => Ok(Self::Swarming),
            "torus" => Ok(Self::Torus),
            other => Err(format!("unknown state '{other}' (expected swarming or torus)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouzinStates {
    pub swarming: f64,
    pub torus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouzinSection {
    pub r_repulsion: f64,
    pub r_attraction: f64,
    pub speed: f64,
    pub dt: f64,
    pub max_turn_rate_deg: f64,
    pub perception_angle_deg: f64,
    pub noise_sd: f64,
    pub spatial_extent: f64,
    pub states: CouzinStates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwarmalatorSection {
    pub a: f64,
    pub b: f64,
    pub j: f64,
    pub k: f64,
    pub omega: f64,
    pub dt: f64,
    pub spatial_extent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub runs: usize,
    pub burn_in_steps: usize,
    pub snapshot_interval: usize,
    pub max_snapshots: usize,
    pub couzin_agents: usize,
    pub swarmalator_agents: usize,
    pub anomalous_index: usize,
    pub base_seed: u64,
    pub workers: usize,
}

/// Fields of the anomalous Couzin agent that differ from nominal.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouzinOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_repulsion: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_orientation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_attraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_turn_rate_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perception_angle_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouzinCase {
    pub nominal_state: CollectiveState,
    pub signal: SignalKind,
    pub oobp_pass: String,
    pub lgs_direction: Direction,
    #[serde(default)]
    pub anomaly: CouzinOverrides,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwarmalatorCase {
    pub signal: SignalKind,
    pub oobp_pass: String,
    pub lgs_direction: Direction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anomaly_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anomaly_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anomaly_j: Option<f64>,
    /// One anomaly variant per value; empty keeps the nominal K.
    #[serde(default)]
    pub anomaly_k: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub couzin: CouzinSection,
    pub swarmalator: SwarmalatorSection,
    pub experiment: ExperimentSection,
    pub case1: CouzinCase,
    pub case2: CouzinCase,
    pub case3: CouzinCase,
    pub case4: CouzinCase,
    pub case5: SwarmalatorCase,
    pub output: OutputSection,
}

fn parse_value(text: &str, origin: &str) -> Result<Value, ConfigError> {
    text.parse::<toml::Table>()
        .map(Value::Table)
        .map_err(|e| ConfigError::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        })
}

/// Recursively overlays `top` onto `base`; tables merge, everything else
/// replaces.
fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Table(b), Value::Table(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(existing) => merge(existing, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, t) => *b = t,
    }
}

/// Interprets an environment value as a TOML scalar or array, falling back
/// to a plain string.
fn env_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn apply_override(root: &mut Value, path: &[String], value: Value) -> Result<(), ConfigError> {
    let dotted = path.join(".");
    let mut node = root;
    for (depth, key) in path.iter().enumerate() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| invalid(&dotted, "is not a table"))?;
        if depth + 1 == path.len() {
            table.insert(key.clone(), value);
            return Ok(());
        }
        node = table
            .entry(key.clone())
            .or_insert_with(|| Value::Table(toml::Table::new()));
    }
    Err(invalid(dotted, "empty override key"))
}

impl Default for Config {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_CONFIG).expect("shipped default config is valid")
    }
}

impl Config {
    /// Parses a complete configuration.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Self::from_value(parse_value(text, "config")?)
    }

    fn from_value(value: Value) -> Result<Self, ConfigError> {
        let config: Config = value.try_into().map_err(|e: toml::de::Error| ConfigError::Parse {
            origin: "config".into(),
            message: e.message().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Defaults, overlaid by `path` (which may be partial) and then by
    /// matching entries of `env`.
    pub fn load<I>(path: Option<&Path>, env: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut value = parse_value(DEFAULT_CONFIG, "defaults")?;
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.display().to_string(),
                source,
            })?;
            merge(&mut value, parse_value(&text, &path.display().to_string())?);
        }
        let mut overrides: Vec<(String, String)> = env
            .into_iter()
            .filter(|(k, _)| k.starts_with(ENV_PREFIX))
            .collect();
        overrides.sort();
        for (key, raw) in overrides {
            let path: Vec<String> = key[ENV_PREFIX.len()..]
                .split("__")
                .map(str::to_ascii_lowercase)
                .collect();
            apply_override(&mut value, &path, env_value(&raw))?;
        }
        Self::from_value(value)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn validate(&self) -> Result<(), ConfigError> {
        for state in [CollectiveState::Swarming, CollectiveState::Torus] {
            self.couzin_params(state).validate().map_err(|e| invalid("couzin", e))?;
        }
        self.swarmalator_params().validate().map_err(|e| invalid("swarmalator", e))?;
        for case in 1..=5 {
            self.case_spec(case)?;
        }
        let e = &self.experiment;
        if e.runs == 0 {
            return Err(invalid("experiment.runs", "must be at least 1"));
        }
        if e.snapshot_interval == 0 || e.max_snapshots == 0 {
            return Err(invalid("experiment.snapshot_interval", "snapshot settings must be positive"));
        }
        for model in [ModelKind::Couzin, ModelKind::Swarmalator] {
            self.experiment_config(model)
                .validate()
                .map_err(|err| invalid("experiment", err))?;
        }
        Ok(())
    }

    pub fn couzin_params(&self, state: CollectiveState) -> CouzinParams {
        let c = &self.couzin;
        CouzinParams {
            r_repulsion: c.r_repulsion,
            r_orientation: match state {
                CollectiveState::Swarming => c.states.swarming,
                CollectiveState::Torus => c.states.torus,
            },
            r_attraction: c.r_attraction,
            perception_angle: c.perception_angle_deg.to_radians(),
            max_turn_rate: c.max_turn_rate_deg.to_radians(),
            speed: c.speed,
            noise_sd: c.noise_sd,
            dt: c.dt,
        }
    }

    pub fn swarmalator_params(&self) -> SwarmalatorParams {
        let s = &self.swarmalator;
        SwarmalatorParams {
            a: s.a,
            b: s.b,
            j: s.j,
            k: s.k,
            omega: s.omega,
            dt: s.dt,
        }
    }

    pub fn n_agents(&self, model: ModelKind) -> usize {
        match model {
            ModelKind::Couzin => self.experiment.couzin_agents,
            ModelKind::Swarmalator => self.experiment.swarmalator_agents,
        }
    }

    pub fn spatial_extent(&self, model: ModelKind) -> f64 {
        match model {
            ModelKind::Couzin => self.couzin.spatial_extent,
            ModelKind::Swarmalator => self.swarmalator.spatial_extent,
        }
    }

    pub fn experiment_config(&self, model: ModelKind) -> ExperimentConfig {
        let e = &self.experiment;
        ExperimentConfig {
            runs: e.runs,
            burn_in_steps: e.burn_in_steps,
            snapshot_interval: e.snapshot_interval,
            max_snapshots: e.max_snapshots,
            n_agents: self.n_agents(model),
            anomalous_index: e.anomalous_index,
            base_seed: e.base_seed,
            spatial_extent: self.spatial_extent(model),
            workers: e.workers,
        }
    }

    pub fn case_model(case_id: u8) -> Result<ModelKind, ConfigError> {
        match case_id {
            1..=4 => Ok(ModelKind::Couzin),
            5 => Ok(ModelKind::Swarmalator),
            other => Err(invalid("case", format!("unknown case {other} (expected 1..5)"))),
        }
    }

    /// Builds the detection scenario for `case_id` (1..=5).
    pub fn case_spec(&self, case_id: u8) -> Result<CaseSpec, ConfigError> {
        let model = Self::case_model(case_id)?;
        let n = self.n_agents(model);
        let key = |field: &str| format!("case{case_id}.{field}");
        let spec = match case_id {
            5 => {
                let c = &self.case5;
                let nominal = self.swarmalator_params();
                let base = SwarmalatorParams {
                    a: c.anomaly_a.unwrap_or(nominal.a),
                    b: c.anomaly_b.unwrap_or(nominal.b),
                    j: c.anomaly_j.unwrap_or(nominal.j),
                    ..nominal
                };
                let anomalies = if c.anomaly_k.is_empty() {
                    vec![base]
                } else {
                    c.anomaly_k.iter().map(|&k| SwarmalatorParams { k, ..base }).collect()
                };
                CaseSpec {
                    case_id,
                    params: CaseParams::Swarmalator { nominal, anomalies },
                    signal_kind: c.signal,
                    oobp_filter: parse_pass_set(&c.oobp_pass, n)
                        .map_err(|m| invalid(key("oobp_pass"), m))?,
                    lgs_direction: c.lgs_direction,
                }
            }
            _ => {
                let c = match case_id {
                    1 => &self.case1,
                    2 => &self.case2,
                    3 => &self.case3,
                    _ => &self.case4,
                };
                let nominal = self.couzin_params(c.nominal_state);
                let o = &c.anomaly;
                let anomaly = CouzinParams {
                    r_repulsion: o.r_repulsion.unwrap_or(nominal.r_repulsion),
                    r_orientation: o.r_orientation.unwrap_or(nominal.r_orientation),
                    r_attraction: o.r_attraction.unwrap_or(nominal.r_attraction),
                    speed: o.speed.unwrap_or(nominal.speed),
                    max_turn_rate: o
                        .max_turn_rate_deg
                        .map_or(nominal.max_turn_rate, f64::to_radians),
                    perception_angle: o
                        .perception_angle_deg
                        .map_or(nominal.perception_angle, f64::to_radians),
                    noise_sd: o.noise_sd.unwrap_or(nominal.noise_sd),
                    dt: nominal.dt,
                };
                CaseSpec {
                    case_id,
                    params: CaseParams::Couzin {
                        nominal,
                        anomalies: vec![anomaly],
                    },
                    signal_kind: c.signal,
                    oobp_filter: parse_pass_set(&c.oobp_pass, n)
                        .map_err(|m| invalid(key("oobp_pass"), m))?,
                    lgs_direction: c.lgs_direction,
                }
            }
        };
        spec.params.validate().map_err(|e| invalid(key("anomaly"), e))?;
        match (model, spec.signal_kind) {
            (_, SignalKind::Raw)
            | (ModelKind::Couzin, SignalKind::PhaseComplex) => {
                return Err(invalid(key("signal"), format!("{} is not available", spec.signal_kind)))
            }
            _ => {}
        }
        Ok(spec)
    }
}

/// Parses a 1-based pass set such as `"5..N"` or `"1,4..N"`; `N` is the
/// vertex count.
pub fn parse_pass_set(text: &str, n: usize) -> Result<FilterSpec, String> {
    let bound = |s: &str| -> Result<usize, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("n") {
            Ok(n)
        } else {
            s.parse::<usize>().map_err(|_| format!("'{s}' is not an index"))
        }
    };
    let mut pass = Vec::new();
    for item in text.split(',') {
        match item.split_once("..") {
            Some((lo, hi)) => {
                let (lo, hi) = (bound(lo)?, bound(hi)?);
                if lo > hi {
                    return Err(format!("empty range {lo}..{hi}"));
                }
                pass.extend(lo..=hi);
            }
            None => pass.push(bound(item)?),
        }
    }
    let filter = FilterSpec::indicator(pass).map_err(|e| e.to_string())?;
    filter.validate(n).map_err(|e| e.to_string())?;
    Ok(filter)
}
