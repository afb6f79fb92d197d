//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use nalgebra::Vector2;
use rand::Rng;

use swarm_gsp::bridge::{build_swarm_graph, extract_signal};
use swarm_gsp::config::{CollectiveState, Config};
use swarm_gsp::detection::Method;
use swarm_gsp::experiment::{auc_vs_snapshots, run_case, RocCurvePoint};
use swarm_gsp::models::{
    couzin_step, dynamics_rng, init_swarm, order_metrics, swarmalator_diagnostics,
    swarmalator_step, CouzinParams, ModelKind, StateClass, SwarmState, SwarmalatorParams,
    SwarmalatorState,
};
use swarm_gsp::roc::auc;
use swarm_gsp::spectral::{
    apply_filter, gft, gft_power, igft, FilterSpec, SignalKind, SpectralBasis,
};

/// Seeds behind the concentration thresholds of criterion 6. Pilot
/// fractions over these seeds (1500 steps): torus/u in {1..5} ranged
/// 0.760-0.844, swarmalator/h in {1..3} ranged 0.549-0.602.
const CONCENTRATION_SEEDS: std::ops::RangeInclusive<u64> = 1..=10;
const TORUS_U_BAND: usize = 5;
const TORUS_U_MIN_FRACTION: f64 = 0.5;
const SWARMALATOR_H_BAND: usize = 3;
const SWARMALATOR_H_MIN_FRACTION: f64 = 0.5;

struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { failures: Vec::new(), notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }
}

fn spectral_suite() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst = [0.0f64; 4];
    for i in 0..100 {
        let n = [10, 50, 200][i % 3];
        let x = random_positions(&mut r, n, 3, 10.0);
        let g = build_swarm_graph(&x).unwrap();
        let basis = SpectralBasis::of_graph(&g).unwrap();
        let lam = basis.eigenvalues();
        o.check(
            lam.iter().all(|&l| (-1e-9..=2.0 + 1e-9).contains(&l)),
            format!("graph {i}: eigenvalue outside [0,2]"),
        );
        o.check(lam[0].abs() <= 1e-9, format!("graph {i}: |λ1| = {:e}", lam[0].abs()));

        let f = random_signal(&mut r, n, 3, i % 2 == 0);
        let spec = gft(&basis, &f).unwrap();
        let energy = f.energy();
        let parseval = (gft_power(&spec).sum() - energy).abs() / energy;
        let back = igft(&basis, &spec).unwrap();
        let mut round = max_abs_diff(back.re(), f.re());
        if let (Some(a), Some(b)) = (back.im(), f.im()) {
            round = round.max(max_abs_diff(a, b));
        }
        let l = laplacian_oracle(g.adjacency());
        let lgs = apply_filter(&basis, &FilterSpec::Lgs, &f).unwrap();
        let mut lgs_err = max_abs_diff(lgs.re(), &(&l * f.re()));
        if let (Some(a), Some(b)) = (lgs.im(), f.im()) {
            lgs_err = lgs_err.max(max_abs_diff(a, &(&l * b)));
        }
        worst = [worst[0].max(lam[0].abs()), worst[1].max(parseval), worst[2].max(round), worst[3].max(lgs_err)];
        o.check(parseval <= 1e-10, format!("graph {i}: Parseval error {parseval:e}"));
        o.check(round <= 1e-10, format!("graph {i}: round trip error {round:e}"));
        o.check(lgs_err <= 1e-8, format!("graph {i}: LGS vs L̄f error {lgs_err:e}"));
    }
    let elapsed = start.elapsed();
    o.check(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"));
    o.note(format!(
        "worst |λ1| {:.1e}, Parseval {:.1e}, round trip {:.1e}, LGS {:.1e}; {:.2?}",
        worst[0], worst[1], worst[2], worst[3], elapsed
    ));
    o
}

fn brute_force_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut twice, mut pairs) = (0u64, 0u64);
    for (si, _) in scores.iter().zip(labels).filter(|(_, &l)| l) {
        for (sj, _) in scores.iter().zip(labels).filter(|(_, &l)| !l) {
            pairs += 1;
            twice += if si > sj { 2 } else if si == sj { 1 } else { 0 };
        }
    }
    twice as f64 / (2 * pairs) as f64
}

fn exact_oracles() -> Outcome {
    let mut o = Outcome::new();
    let mut r = rng(2);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = r.gen_range(2..80);
        let grid = r.gen_range(2..30);
        let scores: Vec<f64> = (0..n).map(|_| r.gen_range(0..grid) as f64 / 7.0).collect();
        let mut labels: Vec<bool> = (0..n).map(|_| r.gen_bool(0.3)).collect();
        labels[0] = true;
        labels[1] = false;
        if auc(&scores, &labels).unwrap() != brute_force_auc(&scores, &labels) {
            mismatches += 1;
        }
    }
    o.check(mismatches == 0, format!("{mismatches}/1000 AUC instances differ from pair counting"));

    let mut graph_err = 0.0f64;
    let mut identity_err = 0.0f64;
    for i in 0..50 {
        let n = 2 + i * 3;
        let x = random_positions(&mut r, n, 1 + i % 3, 5.0);
        let g = build_swarm_graph(&x).unwrap();
        graph_err = graph_err.max(max_abs_diff(g.adjacency(), &kernel_oracle(&x).0));
        let basis = SpectralBasis::of_graph(&g).unwrap();
        let f = random_signal(&mut r, n, 2, i % 2 == 1);
        let out = apply_filter(&basis, &FilterSpec::indicator(1..=n).unwrap(), &f).unwrap();
        identity_err = identity_err.max(max_abs_diff(out.re(), f.re()));
        if let (Some(a), Some(b)) = (out.im(), f.im()) {
            identity_err = identity_err.max(max_abs_diff(a, b));
        }
    }
    o.check(graph_err <= 1e-12, format!("graph vs double loop {graph_err:e}"));
    o.check(identity_err <= 1e-10, format!("identity filter error {identity_err:e}"));
    o.note(format!("1000 AUC instances exact; graph {graph_err:.1e}; identity {identity_err:.1e}"));
    o
}

fn simulation_invariants() -> Outcome {
    let mut o = Outcome::new();
    let config = Config::default();
    let p = config.couzin_params(CollectiveState::Torus);

    let n = 20;
    let SwarmState::Couzin(mut s) = init_swarm(ModelKind::Couzin, n, 5, 10.0) else { unreachable!() };
    let mut r = dynamics_rng(5);
    let (mut norm_err, mut step_err) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let next = couzin_step(&s, &vec![p; n], &mut r).unwrap();
        for i in 0..n {
            norm_err = norm_err.max((next.headings[i].norm() - 1.0).abs());
            step_err = step_err.max(((next.positions[i] - s.positions[i]).norm() - p.speed * p.dt).abs());
        }
        s = next;
    }
    o.check(norm_err <= 1e-9, format!("heading norm drift {norm_err:e}"));
    o.check(step_err <= 1e-9, format!("step length error {step_err:e}"));

    let quiet = CouzinParams { noise_sd: 0.0, ..p };
    let cap = quiet.max_turn_rate * quiet.dt;
    let SwarmState::Couzin(mut s) = init_swarm(ModelKind::Couzin, 40, 6, 6.0) else { unreachable!() };
    let mut over = 0.0f64;
    for _ in 0..200 {
        let next = couzin_step(&s, &vec![quiet; 40], &mut r).unwrap();
        for i in 0..40 {
            over = over.max(s.headings[i].angle(&next.headings[i]) - cap);
        }
        s = next;
    }
    o.check(over <= 1e-9, format!("turn exceeded cap by {over:e}"));

    let sp = SwarmalatorParams { a: 1.0, b: 1.0, j: 1.0, k: 0.0, omega: 0.0, dt: 0.1 };
    let pair = SwarmalatorState {
        positions: vec![Vector2::new(0.0, 0.0), Vector2::new(0.5, 0.0)],
        velocities: vec![Vector2::zeros(); 2],
        phases: vec![0.3, 0.3],
        step: 0,
    };
    let next = swarmalator_step(&pair, &[sp, sp]).unwrap();
    let drift = ((next.positions[1] - next.positions[0]).norm() - 0.5).abs();
    o.check(drift <= 1e-12, format!("equilibrium pair moved {drift:e}"));

    // equivariance
    let SwarmState::Swarmalator(s) = init_swarm(ModelKind::Swarmalator, 30, 7, 2.0) else { unreachable!() };
    let params: Vec<SwarmalatorParams> = (0..30)
        .map(|i| SwarmalatorParams { k: -0.75 + 0.05 * i as f64, j: if i == 0 { -1.0 } else { 1.0 }, ..sp })
        .collect();
    let perm: Vec<usize> = (0..30).rev().collect();
    let permuted = SwarmalatorState {
        positions: perm.iter().map(|&i| s.positions[i]).collect(),
        velocities: perm.iter().map(|&i| s.velocities[i]).collect(),
        phases: perm.iter().map(|&i| s.phases[i]).collect(),
        step: 0,
    };
    let shift = Vector2::new(12.5, -3.0);
    let shifted = SwarmalatorState { positions: s.positions.iter().map(|x| x + shift).collect(), ..s.clone() };
    let pp: Vec<_> = perm.iter().map(|&i| params[i]).collect();
    let a = swarmalator_step(&s, &params).unwrap();
    let b = swarmalator_step(&permuted, &pp).unwrap();
    let c = swarmalator_step(&shifted, &params).unwrap();
    let perm_err = perm
        .iter()
        .enumerate()
        .map(|(k, &i)| (a.positions[i] - b.positions[k]).norm() + (a.phases[i] - b.phases[k]).abs())
        .fold(0.0, f64::max);
    let shift_err = (0..30)
        .map(|i| (a.positions[i] + shift - c.positions[i]).norm() + (a.phases[i] - c.phases[i]).abs())
        .fold(0.0, f64::max);
    o.check(perm_err <= 1e-12, format!("permutation equivariance error {perm_err:e}"));
    o.check(shift_err <= 1e-9, format!("translation equivariance error {shift_err:e}"));
    o.note(format!(
        "heading drift {norm_err:.1e}, step {step_err:.1e}, cap excess {over:.1e}, pair {drift:.1e}, perm {perm_err:.1e}, shift {shift_err:.1e}"
    ));
    o
}

fn settle(config: &Config, model: ModelKind, state: CollectiveState, seed: u64, steps: usize) -> SwarmState {
    let n = config.n_agents(model);
    let mut s = init_swarm(model, n, seed, config.spatial_extent(model));
    let mut r = dynamics_rng(seed);
    let couzin = vec![config.couzin_params(state); n];
    let swarmalator = vec![config.swarmalator_params(); n];
    for _ in 0..steps {
        s = match &s {
            SwarmState::Couzin(c) => SwarmState::Couzin(couzin_step(c, &couzin, &mut r).unwrap()),
            SwarmState::Swarmalator(w) => SwarmState::Swarmalator(swarmalator_step(w, &swarmalator).unwrap()),
        };
    }
    s
}

fn state_validation() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let config = Config::default();
    let steps = config.experiment.burn_in_steps;
    let count = |model, state, want: &dyn Fn(&SwarmState) -> bool| {
        (1..=50u64).filter(|&seed| want(&settle(&config, model, state, seed, steps))).count()
    };
    let class = |s: &SwarmState| match s {
        SwarmState::Couzin(c) => order_metrics(c).classify(),
        _ => unreachable!(),
    };
    let torus = count(ModelKind::Couzin, CollectiveState::Torus, &|s| class(s) == StateClass::Torus);
    let swarming = count(ModelKind::Couzin, CollectiveState::Swarming, &|s| class(s) == StateClass::Swarming);
    let wave = count(ModelKind::Swarmalator, CollectiveState::Swarming, &|s| match s {
        SwarmState::Swarmalator(w) => swarmalator_diagnostics(w).is_active_wave(),
        _ => unreachable!(),
    });
    for (name, hits) in [("torus", torus), ("swarming", swarming), ("active wave", wave)] {
        o.check(hits >= 40, format!("{name}: {hits}/50"));
    }
    let elapsed = start.elapsed();
    o.check(elapsed < Duration::from_secs(600), format!("took {elapsed:?}"));
    o.note(format!("torus {torus}/50, swarming {swarming}/50, active wave {wave}/50; {elapsed:.1?}"));
    o
}

fn point(curve: &[RocCurvePoint], method: Method, k: usize) -> f64 {
    curve.iter().find(|p| p.method == method && p.num_snapshots == k).unwrap().auc
}

fn detection() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let config = Config::default();
    let runs = 20;
    let k_max = 10;
    for case_id in 1..=5u8 {
        let case = config.case_spec(case_id).unwrap();
        let mut cfg = config.experiment_config(case.model());
        cfg.runs = runs;
        cfg.max_snapshots = k_max;
        let table = run_case(&case, &cfg, &Method::ALL).unwrap();
        let failed = table.failures().count();
        o.check(failed == 0, format!("case {case_id}: {failed} failed runs"));
        let curve = auc_vs_snapshots(&table);
        let mut line = format!("case {case_id}:");
        for m in Method::ALL {
            let (k1, k10) = (point(&curve, m, 1), point(&curve, m, k_max));
            line += &format!(" {m} {k1:.3}->{k10:.3}");
            o.check(k10 > 0.55, format!("(b) case {case_id} {m}: AUC@10 = {k10:.4}"));
            o.check(k10 >= k1, format!("(c) case {case_id} {m}: AUC@10 {k10:.4} < AUC@1 {k1:.4}"));
        }
        if case_id == 5 {
            let worst = (5..=k_max).map(|k| point(&curve, Method::Oobp, k)).fold(1.0, f64::min);
            o.check(worst >= 0.95, format!("(a) case 5 oobp: min AUC over k>=5 = {worst:.4}"));
        }
        o.note(line);
    }

    // null: case 1 with the anomaly replaced by the nominal parameters
    let mut null = config.case_spec(1).unwrap();
    null.params = null.params.null();
    let mut cfg = config.experiment_config(null.model());
    cfg.runs = runs;
    cfg.max_snapshots = k_max;
    let curve = auc_vs_snapshots(&run_case(&null, &cfg, &Method::ALL).unwrap());
    let mut line = "null case 1:".to_string();
    for m in Method::ALL {
        let a = point(&curve, m, k_max);
        line += &format!(" {m} {a:.3}");
        o.check((0.42..=0.58).contains(&a), format!("(d) null {m}: AUC@10 = {a:.4}"));
    }
    o.note(line);
    o.note(format!("{:.1?}", start.elapsed()));
    o
}

fn band_fraction(state: &SwarmState, kind: SignalKind, band: usize) -> f64 {
    let g = build_swarm_graph(&state.positions()).unwrap();
    let basis = SpectralBasis::of_graph(&g).unwrap();
    let power = gft_power(&gft(&basis, &extract_signal(state, kind).unwrap()).unwrap());
    power.rows(0, band).sum() / power.sum()
}

fn concentration() -> Outcome {
    let mut o = Outcome::new();
    let config = Config::default();
    let steps = config.experiment.burn_in_steps;
    let mut torus = Vec::new();
    let mut wave = Vec::new();
    for seed in CONCENTRATION_SEEDS {
        let s = settle(&config, ModelKind::Couzin, CollectiveState::Torus, seed, steps);
        torus.push(band_fraction(&s, SignalKind::NormalizedVelocity, TORUS_U_BAND));
        let s = settle(&config, ModelKind::Swarmalator, CollectiveState::Swarming, seed, steps);
        wave.push(band_fraction(&s, SignalKind::PhaseComplex, SWARMALATOR_H_BAND));
    }
    let min = |v: &[f64]| v.iter().copied().fold(1.0, f64::min);
    for (seed, (t, w)) in CONCENTRATION_SEEDS.zip(torus.iter().zip(&wave)) {
        o.check(*t > TORUS_U_MIN_FRACTION, format!("torus u seed {seed}: {t:.3}"));
        o.check(*w > SWARMALATOR_H_MIN_FRACTION, format!("swarmalator h seed {seed}: {w:.3}"));
    }
    o.note(format!(
        "min fraction torus u {{1..{TORUS_U_BAND}}} {:.3}, swarmalator h {{1..{SWARMALATOR_H_BAND}}} {:.3}",
        min(&torus),
        min(&wave)
    ));
    o
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 6] = [
        ("1 spectral property suite", spectral_suite),
        ("2 exact oracles", exact_oracles),
        ("3 simulation invariants", simulation_invariants),
        ("4 state validation", state_validation),
        ("5 detection reproduction", detection),
        ("6 spectral concentration", concentration),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        let verdict = if o.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {name}: {verdict}");
        for n in &o.notes {
            println!("    {n}");
        }
        for f in &o.failures {
            println!("    failed: {f}");
        }
        if !o.failures.is_empty() {
            failed += 1;
        }
    }
    println!("acceptance: {} of 6 criteria passed", 6 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
