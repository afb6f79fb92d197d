//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bridge::{build_swarm_graph, extract_signal};
use crate::config::{CollectiveState, Config, ConfigError};
use crate::detection::{AgentScores, Method};
use crate::experiment::{
    auc_vs_snapshots, auc_vs_snapshots_for_variant, run_case,
    ExperimentConfig,
};
use crate::models::{
    couzin_step, dynamics_rng, init_swarm, order_metrics, swarmalator_diagnostics,
    swarmalator_step, ModelKind, StateClass, SwarmState,
};
use crate::output::{self, RunFailure, RunManifest, TrajectoryWriter};
use crate::spectral::{gft, gft_power, SignalKind, SpectralBasis};

#[derive(Debug, Parser)]
#[command(name = "swarm-gsp", version, about = "Graph-signal anomaly detection for simulated swarms")]
struct Cli {
    /// TOML file overlaid on the shipped defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dump a trajectory as CSV.
    Simulate(SimulateArgs),
    /// GFT power spectrum of one swarm state as CSV.
    Spectrum(SpectrumArgs),
    /// Per-agent detector scores of a single run.
    Detect(DetectArgs),
    /// Monte-Carlo ensemble of a detection case with ROC/AUC curves.
    Experiment(ExperimentArgs),
    /// Classify the collective state a parameter set settles into.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Couzin,
    Swarmalator,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Couzin => ModelKind::Couzin,
            ModelArg::Swarmalator => ModelKind::Swarmalator,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StateArg {
    Swarming,
    Torus,
}

impl From<StateArg> for CollectiveState {
    fn from(s: StateArg) -> Self {
        match s {
            StateArg::Swarming => CollectiveState::Swarming,
            StateArg::Torus => CollectiveState::Torus,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SignalArg {
    #[value(alias = "adjusted_position")]
    R,
    #[value(alias = "normalized_velocity")]
    U,
    #[value(alias = "phase_complex")]
    H,
}

impl From<SignalArg> for SignalKind {
    fn from(s: SignalArg) -> Self {
        match s {
            SignalArg::R => SignalKind::AdjustedPosition,
            SignalArg::U => SignalKind::NormalizedVelocity,
            SignalArg::H => SignalKind::PhaseComplex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Oobp,
    Lgs,
    Both,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            Self::Oobp => vec![Method::Oobp],
            Self::Lgs => vec![Method::Lgs],
            Self::Both => Method::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
struct ModelSelection {
    #[arg(long, value_enum, default_value = "couzin")]
    model: ModelArg,
    /// Nominal collective state (zonal model only).
    #[arg(long, value_enum, default_value = "torus")]
    state: StateArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Steps to simulate before the output state.
    #[arg(long, default_value_t = 1500)]
    steps: usize,
    /// Agent count; defaults to the configured count for the model.
    #[arg(long)]
    agents: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelSelection,
    /// Write every n-th step.
    #[arg(long, default_value_t = 50)]
    every: usize,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelSelection,
    #[arg(long, value_enum)]
    signal: SignalArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    case: u8,
    #[arg(long, value_enum, default_value = "both")]
    method: MethodArg,
    #[arg(long)]
    snapshots: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    case: u8,
    #[arg(long, value_enum, default_value = "both")]
    method: MethodArg,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    snapshots: Option<usize>,
    /// Base seed; run r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    /// Replace every anomaly by the nominal parameters.
    #[arg(long)]
    null: bool,
    /// Output directory (config `output.dir` when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, value_enum, default_value = "couzin")]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "torus")]
    state: StateArg,
    #[arg(long, default_value_t = 50)]
    runs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1500)]
    steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Runtime(_) => 2,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

fn config_error(key: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("invalid value for `{key}`: {message}"))
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code. `env` supplies config overrides.
pub fn dispatch<I, T, E>(args: I, env: E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    E: IntoIterator<Item = (String, String)>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let command: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match run(cli, env, command) {
        Ok(()) => 0,
        Err(e) => {
            let (CliError::Config(m) | CliError::Runtime(m)) = &e;
            eprintln!("error: {m}");
            e.exit_code()
        }
    }
}

fn run<E>(cli: Cli, env: E, command: Vec<String>) -> Result<(), CliError>
where
    E: IntoIterator<Item = (String, String)>,
{
    let started = Instant::now();
    let config = Config::load(cli.config.as_deref(), env)?;
    let (out, seeds) = match cli.command {
        Command::Simulate(a) => {
            let meta = (a.out.clone(), vec![a.model.seed]);
            simulate(&config, a)?;
            meta
        }
        Command::Spectrum(a) => {
            let meta = (a.out.clone(), vec![a.model.seed]);
            spectrum(&config, a)?;
            meta
        }
        Command::Detect(a) => {
            let seed = a.seed.unwrap_or(config.experiment.base_seed);
            let meta = (a.out.clone(), vec![seed]);
            detect(&config, a)?;
            meta
        }
        Command::Validate(a) => {
            let seeds = (0..a.runs as u64).map(|r| a.seed.wrapping_add(r)).collect();
            let meta = (a.out.clone(), seeds);
            validate(&config, a)?;
            meta
        }
        Command::Experiment(a) => return experiment(&config, a, command),
    };
    // Single-file outputs get a sidecar `<file>.manifest.json`.
    if let Some(out) = out {
        let mut path = out.clone().into_os_string();
        path.push(".manifest.json");
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            config_echo: config.to_toml_string(),
            seeds,
            outputs: vec![out.display().to_string(), PathBuf::from(&path).display().to_string()],
            wall_time_seconds: started.elapsed().as_secs_f64(),
            case: None,
            failures: Vec::new(),
        };
        save_manifest(Path::new(&path), &manifest)?;
    }
    Ok(())
}

fn save_manifest(path: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Nominal model driver for the inspection subcommands.
struct NominalRun {
    state: SwarmState,
    couzin: Vec<crate::models::CouzinParams>,
    swarmalator: Vec<crate::models::SwarmalatorParams>,
    rng: crate::models::SimRng,
}

impl NominalRun {
    fn new(config: &Config, sel: &ModelSelection) -> Result<Self, CliError> {
        Self::with(config, sel.model.into(), sel.state.into(), sel.agents, sel.seed)
    }

    fn with(
        config: &Config,
        model: ModelKind,
        state: CollectiveState,
        agents: Option<usize>,
        seed: u64,
    ) -> Result<Self, CliError> {
        let n = agents.unwrap_or_else(|| config.n_agents(model));
        if n < 2 {
            return Err(config_error("agents", "need at least 2 agents"));
        }
        Ok(Self {
            state: init_swarm(model, n, seed, config.spatial_extent(model)),
            couzin: vec![config.couzin_params(state); n],
            swarmalator: vec![config.swarmalator_params(); n],
            rng: dynamics_rng(seed),
        })
    }

    fn step(&mut self) -> Result<(), CliError> {
        self.state = match &self.state {
            SwarmState::Couzin(s) => SwarmState::Couzin(couzin_step(s, &self.couzin, &mut self.rng)?),
            SwarmState::Swarmalator(s) => SwarmState::Swarmalator(swarmalator_step(s, &self.swarmalator)?),
        };
        Ok(())
    }
}

fn simulate(config: &Config, a: SimulateArgs) -> Result<(), CliError> {
    if a.every == 0 {
        return Err(config_error("every", "must be positive"));
    }
    let mut run = NominalRun::new(config, &a.model)?;
    let mut w = TrajectoryWriter::new(open_output(a.out.as_deref())?);
    w.write_state(&run.state)?;
    for step in 1..=a.model.steps {
        run.step()?;
        if step % a.every == 0 {
            w.write_state(&run.state)?;
        }
    }
    w.finish()?;
    Ok(())
}

fn spectrum(config: &Config, a: SpectrumArgs) -> Result<(), CliError> {
    let kind: SignalKind = a.signal.into();
    let model: ModelKind = a.model.model.into();
    if model == ModelKind::Couzin && kind == SignalKind::PhaseComplex {
        return Err(config_error("signal", "h needs the swarmalator model"));
    }
    let mut run = NominalRun::new(config, &a.model)?;
    for _ in 0..a.model.steps {
        run.step()?;
    }
    let graph = build_swarm_graph(&run.state.positions())?;
    let basis = SpectralBasis::of_graph(&graph)?;
    let signal = extract_signal(&run.state, kind)?;
    let power = gft_power(&gft(&basis, &signal)?);
    output::write_spectrum(open_output(a.out.as_deref())?, basis.eigenvalues(), &power)?;
    Ok(())
}

fn detect(config: &Config, a: DetectArgs) -> Result<(), CliError> {
    let case = config.case_spec(a.case)?;
    let mut cfg = config.experiment_config(case.model());
    cfg.runs = 1;
    if let Some(k) = a.snapshots {
        cfg.max_snapshots = k;
    }
    if let Some(seed) = a.seed {
        cfg.base_seed = seed;
    }
    let methods = a.method.methods();
    let table = run_case(&case, &cfg, &methods).map_err(|e| CliError::Config(e.to_string()))?;
    let run = &table.runs[0];
    let scores = run.outcome.as_ref().map_err(|e| CliError::Runtime(e.clone()))?;
    let mut agent_scores = Vec::new();
    for m in &methods {
        let series = &scores.cumulative[m];
        let acc = AgentScores {
            accumulated: series.last().cloned().unwrap_or_default(),
            snapshots_used: series.len(),
            method: *m,
            direction: case.direction(*m),
        };
        agent_scores.push(acc);
    }
    output::write_agent_scores(
        open_output(a.out.as_deref())?,
        0,
        cfg.anomalous_index,
        &agent_scores,
    )?;
    Ok(())
}

fn experiment(config: &Config, a: ExperimentArgs, command: Vec<String>) -> Result<(), CliError> {
    let started = Instant::now();
    let mut case = config.case_spec(a.case)?;
    if a.null {
        case.params = case.params.null();
    }
    let mut cfg: ExperimentConfig = config.experiment_config(case.model());
    if let Some(r) = a.runs {
        cfg.runs = r;
    }
    if let Some(k) = a.snapshots {
        cfg.max_snapshots = k;
    }
    if let Some(seed) = a.seed {
        cfg.base_seed = seed;
    }
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;

    let methods = a.method.methods();
    let table = run_case(&case, &cfg, &methods)?;
    let curves = auc_vs_snapshots(&table);

    let dir = a.out.unwrap_or_else(|| PathBuf::from(&config.output.dir));
    fs::create_dir_all(&dir)?;
    let mut outputs = Vec::new();
    let mut emit = |name: &str| -> Result<BufWriter<File>, CliError> {
        let path = dir.join(name);
        outputs.push(path.display().to_string());
        Ok(BufWriter::new(File::create(path)?))
    };
    output::write_score_table(emit("scores.csv")?, &table)?;
    output::write_curves(emit("curves.csv")?, &curves)?;
    if case.params.n_variants() > 1 {
        let per_variant: Vec<_> = (0..case.params.n_variants())
            .map(|v| (v, auc_vs_snapshots_for_variant(&table, v)))
            .collect();
        output::write_variant_curves(emit("curves_by_variant.csv")?, &case.params, &per_variant)?;
    }

    let failures: Vec<RunFailure> = table
        .failures()
        .map(|(run_id, error)| RunFailure {
            run_id,
            error: error.to_string(),
        })
        .collect();
    for f in &failures {
        eprintln!("warning: run {} failed: {}", f.run_id, f.error);
    }

    // Echo the effective settings so the manifest alone reproduces the run.
    let mut effective = config.clone();
    effective.experiment.runs = cfg.runs;
    effective.experiment.max_snapshots = cfg.max_snapshots;
    effective.experiment.base_seed = cfg.base_seed;
    outputs.push(dir.join("manifest.json").display().to_string());
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command,
        config_echo: effective.to_toml_string(),
        seeds: (0..cfg.runs).map(|r| cfg.seed(r)).collect(),
        outputs,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        case: Some(serde_json::json!({
            "case_id": case.case_id,
            "null": a.null,
            "methods": methods,
            "signal": case.signal_kind,
            "params": case.params,
            "variants_drawn": table.runs.iter().map(|r| r.variant).collect::<Vec<_>>(),
        })),
        failures,
    };
    save_manifest(&dir.join("manifest.json"), &manifest)?;

    for p in curves.iter().filter(|p| p.num_snapshots == cfg.max_snapshots) {
        eprintln!(
            "case {} {}: AUC {:.4} at {} snapshots over {} runs",
            p.case_id, p.method, p.auc, p.num_snapshots, p.n_runs
        );
    }
    Ok(())
}

fn validate(config: &Config, a: ValidateArgs) -> Result<(), CliError> {
    let model: ModelKind = a.model.into();
    let mut out = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(open_output(a.out.as_deref())?);
    let mut hits = 0;
    match model {
        ModelKind::Couzin => {
            let state: CollectiveState = a.state.into();
            out.write_record(["run", "seed", "polarization", "angular_momentum", "class"])?;
            for r in 0..a.runs {
                let seed = a.seed.wrapping_add(r as u64);
                let mut run = NominalRun::with(config, model, state, None, seed)?;
                for _ in 0..a.steps {
                    run.step()?;
                }
                let SwarmState::Couzin(s) = &run.state else { unreachable!() };
                let m = order_metrics(s);
                let class = m.classify();
                let expected = match state {
                    CollectiveState::Swarming => StateClass::Swarming,
                    CollectiveState::Torus => StateClass::Torus,
                };
                if class == expected {
                    hits += 1;
                }
                out.write_record([
                    r.to_string(),
                    seed.to_string(),
                    output::fmt_float(m.polarization),
                    output::fmt_float(m.angular_momentum),
                    class.as_str().to_string(),
                ])?;
            }
        }
        ModelKind::Swarmalator => {
            out.write_record(["run", "seed", "circular_variance", "annulus_ratio", "class"])?;
            for r in 0..a.runs {
                let seed = a.seed.wrapping_add(r as u64);
                let mut run = NominalRun::with(config, model, CollectiveState::Swarming, None, seed)?;
                for _ in 0..a.steps {
                    run.step()?;
                }
                let SwarmState::Swarmalator(s) = &run.state else { unreachable!() };
                let d = swarmalator_diagnostics(s);
                let active = d.is_active_wave();
                if active {
                    hits += 1;
                }
                out.write_record([
                    r.to_string(),
                    seed.to_string(),
                    output::fmt_float(d.circular_variance),
                    output::fmt_float(d.annulus_ratio),
                    (if active { "active_wave" } else { "other" }).to_string(),
                ])?;
            }
        }
    }
    out.flush()?;
    eprintln!("{hits}/{} runs in the expected state", a.runs);
    Ok(())
}
