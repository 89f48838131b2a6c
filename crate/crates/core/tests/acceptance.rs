//! End-to-end acceptance checks. Each test prints one PASS/FAIL line straight
//! to stdout, so the verdicts show up even when output capture is on.

mod common;

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::time::Instant;

use cbf_core::certificates::{
    calibrate, exponent_gap_norm, exponent_robustness_lhs, ode_blowup_time, ode_threshold,
    robustness_r,
};
use cbf_core::checkpoint::{self, CheckpointHeader};
use cbf_core::fields::{norm_l2, to_spectral, PhysicalField};
use cbf_core::harness::{
    resume, run_scenario, ConstantsChoice, Perturbation, PerturbationMode, RunContext,
    ScenarioKind, ScenarioSpec, SweepResult,
};
use cbf_core::integrator::{
    identical_twin_difference, simulate, simulate_from, InitialCondition, SimulationConfig,
};
use cbf_core::operators::{
    absorption, check_difference_bound, check_dissipation_bracket, check_monotonicity,
    check_power_mean, convective, leray_project, stokes, InequalityReport,
};
use cbf_core::Grid;
use common::*;
use num_complex::Complex64;
use tempfile::tempdir;

fn verdict(n: u32, pass: bool, detail: &str) {
    let line = format!("criterion {n}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let out = std::io::stdout();
    let mut lock = out.lock();
    lock.write_all(line.as_bytes()).unwrap();
    lock.flush().unwrap();
    assert!(pass, "criterion {n} failed: {detail}");
}

fn sine_mode(n: usize) -> cbf_core::SpectralField {
    to_spectral(&PhysicalField::from_fn(Grid::new(n).unwrap(), |x| [0.0, x[0].sin(), 0.0]))
}

#[test]
fn criterion_01_inequality_suite() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (j, r) in [1.0, 1.5, 2.0, 3.0].into_iter().enumerate() {
        let seed = 7000 + 10 * j as u64;
        let reps: [InequalityReport; 3] = [
            check_monotonicity(r, 100_000, seed),
            check_difference_bound(r, 100_000, seed + 1),
            check_power_mean(r - 1.0, 100_000, seed + 2),
        ];
        for rep in reps {
            if !rep.pass {
                failures.push(format!("{}@r={r} worst {:.6}", rep.lemma_id.as_str(), rep.worst_ratio));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = failures.is_empty() && secs < 60.0;
    verdict(1, pass, &format!("violations [{}] in {secs:.1} s", failures.join("; ")));
}

#[test]
fn criterion_02_dissipation_bracket() {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    for (j, r) in [1.0, 2.0, 3.0].into_iter().enumerate() {
        let rep = check_dissipation_bracket(16, r, 100, 8100 + j as u64).unwrap();
        worst = worst.min(rep.worst_ratio);
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(2, worst >= -1e-6 && secs < 120.0, &format!("min relative slack {worst:.3e} in {secs:.1} s"));
}

#[test]
fn criterion_03_operator_oracles() {
    let g = grid(8);
    let cut = g.dealias_cutoff() as usize;
    let mut conv: f64 = 0.0;
    let mut cubic: f64 = 0.0;
    let mut lattice: f64 = 0.0;
    for seed in 0..3 {
        let u = field(8, 900 + seed, cut, true);
        let v = field(8, 950 + seed, cut, true);
        conv = conv.max(max_coeff_diff(&convective(&u, &v).unwrap(), &convolution_convective(&u, &v)));
        // The absorption product is exact away from the Nyquist planes.
        let fast = absorption(&u, &v, 3.0).unwrap();
        let slow = convolution_cubic(&u, &v);
        for i in (0..g.len()).filter(|&i| !g.k(i).contains(&-g.nyquist())) {
            for c in 0..3 {
                cubic = cubic.max((fast.coeffs[c][i] - slow.coeffs[c][i]).norm());
            }
        }
        let w = field(8, 990 + seed, 4, false);
        let p = leray_project(&w);
        lattice = lattice
            .max(max_coeff_diff(&leray_project(&p), &p))
            .max(max_coeff_diff(&stokes(&leray_project(&w)), &leray_project(&stokes(&w))))
            .max(p.divergence_defect() / norm_l2(&w));
        for i in 0..g.len() {
            let k = g.k(i);
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            // Projection uses the differentiation wavevector (Nyquist
            // components zeroed); the Stokes weight is the full |k|^2.
            let kd = k.map(|kj| if kj == -g.nyquist() { 0 } else { kj });
            let want = project(kd, [w.coeffs[0][i], w.coeffs[1][i], w.coeffs[2][i]]);
            for c in 0..3 {
                lattice = lattice.max((p.coeffs[c][i] - want[c]).norm());
                lattice = lattice.max((stokes(&w).coeffs[c][i] - want[c] * k2).norm());
            }
        }
    }
    let pass = conv <= 1e-8 && cubic <= 1e-8 && lattice <= 1e-12;
    verdict(3, pass, &format!("convective {conv:.2e}, absorption {cubic:.2e}, Leray/Stokes {lattice:.2e}"));
}

#[test]
fn criterion_04_energy_equality() {
    let cfg = SimulationConfig::new(32, 1.0, 0.0, 1.0, 3.0, 1.0, 0.01);
    let res = simulate(&cfg).unwrap();
    let rows = &res.diagnostics.rows;
    let e0 = 0.5 * rows[0].l2 * rows[0].l2;
    let worst = rows.iter().map(|r| r.energy_residual.abs()).fold(0.0, f64::max);
    let monotone = rows.windows(2).all(|w| w[1].l2 < w[0].l2);
    let pass = res.outcome.is_completed() && worst <= 1e-4 * e0 && monotone;
    verdict(4, pass, &format!("max residual / E0 = {:.3e}, energy decreasing: {monotone}", worst / e0));
}

#[test]
fn criterion_05_linear_exactness_and_order() {
    let mu = 0.7;
    let u0 = sine_mode(8);
    let cfg = SimulationConfig::new(8, mu, 0.0, 0.0, 3.0, 1.0, 0.01);
    let res = simulate_from(&cfg, u0.clone(), 0.0).unwrap();
    let scale = u0.max_abs_coeff();
    let decay = res
        .trajectory
        .snapshots
        .iter()
        .map(|s| max_coeff_diff(&s.field, &u0.scaled((-mu * s.t).exp())) / (scale * (-mu * s.t).exp()))
        .fold(0.0, f64::max);

    let mut cfg = SimulationConfig::new(16, 1.0, 0.1, 1.0, 3.0, 0.4, 0.0);
    let finals: Vec<_> = [0.04, 0.02, 0.01]
        .into_iter()
        .map(|dt| {
            cfg.dt = cbf_core::integrator::TimeStep::Fixed(dt);
            simulate(&cfg).unwrap().final_state().clone()
        })
        .collect();
    let order = (norm_l2(&finals[0].sub(&finals[1])) / norm_l2(&finals[1].sub(&finals[2]))).log2();
    let pass = decay <= 1e-6 && (order - 2.0).abs() <= 0.2;
    verdict(5, pass, &format!("decay error {decay:.2e}, self-convergence order {order:.3}"));
}

#[test]
fn criterion_06_ode_threshold() {
    let (a, t) = (2.0, 1.0);
    let eta = ode_threshold(a, 3, t).unwrap();
    let below = dopri(|_, y| a * y.powi(3), 0.99 * eta, 0.0, t, 1e6 * eta);
    let at = dopri(|_, y| a * y.powi(3), eta, 0.0, 2.0 * t, 1e6 * eta);
    let rel = (at.t - t).abs() / t;
    let pass = !below.capped && at.capped && rel <= 0.02;
    verdict(6, pass, &format!("sub-threshold max {:.4}, blow-up at {:.4} (T = {t})", below.max_y, at.t));
}

#[test]
fn criterion_07_blowup_time() {
    let mut worst: f64 = 0.0;
    let mut all_capped = true;
    for c in [0.5, 1.0, 2.0] {
        for x0 in [0.5, 1.0, 2.0] {
            let tb = ode_blowup_time(c, x0).unwrap();
            let run = dopri(|_, x| c * x.powi(3), x0, 0.0, 2.0 * tb, 1e6);
            all_capped &= run.capped;
            worst = worst.max((run.t / tb - 1.0).abs());
        }
    }
    verdict(7, all_capped && worst <= 0.01, &format!("worst relative deviation {worst:.2e}"));
}

fn sweep_base(n: usize) -> SimulationConfig {
    let mut cfg = SimulationConfig::new(n, 1.0, 0.0, 1.0, 3.0, 1.0, 0.02);
    cfg.initial = InitialCondition::TaylorGreen { amplitude: 0.1 };
    cfg
}

#[test]
fn criterion_08_certificate_soundness() {
    let start = Instant::now();
    let base = sweep_base(32);
    let mut spec = ScenarioSpec::new(ScenarioKind::PerturbSweep, Some(base.clone()));
    spec.seed = 8;
    spec.constants = ConstantsChoice::Calibrated;

    // Centre the sweep on the threshold of the reference run.
    let mut cfg = base.clone();
    cfg.record_every = 1;
    cfg.checkpoint_every = Some(1);
    let reference = simulate(&cfg).unwrap();
    let h1 = reference.diagnostics.rows[0].h1;
    let eps: Vec<f64> = spec.calibration_factors.iter().map(|f| f * h1).collect();
    let k = calibrate(&cfg, &reference, &eps, spec.seed).unwrap().constants;
    let r = robustness_r(&reference.diagnostics, cfg.t_end, cfg.r, &k).unwrap();
    spec.perturbations = (0..10)
        .map(|i| Perturbation {
            epsilon: r.sqrt() * 10f64.powf((i as f64 - 4.0) / 2.0),
            mode: PerturbationMode::Initial,
        })
        .collect();

    let dir = tempdir().unwrap();
    let summary = run_scenario(&spec, dir.path(), &RunContext::default()).unwrap();
    let sweep: SweepResult =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sweep.json")).unwrap()).unwrap();
    let certified = sweep.rows.iter().filter(|r| r.certified()).count();
    let secs = start.elapsed().as_secs_f64();
    let pass = summary.exit_code == 0
        && sweep.rows.len() == 10
        && certified > 0
        && sweep.counterexamples == 0
        && secs < 1200.0;
    verdict(
        8,
        pass,
        &format!(
            "R = {r:.4e}, {certified}/10 certified, {} counterexamples, {secs:.0} s",
            sweep.counterexamples
        ),
    );
}

#[test]
fn criterion_09_weak_strong_counterpart() {
    let base = sweep_base(16);
    let (u0, t0) = base.initial_state(None).unwrap();
    let twin = identical_twin_difference(&base, &u0, t0).unwrap();

    let mut spec = ScenarioSpec::new(ScenarioKind::PerturbSweep, Some(base));
    spec.seed = 9;
    spec.perturbations = [1e-3, 1e-2, 3e-2, 1e-1]
        .into_iter()
        .map(|epsilon| Perturbation { epsilon, mode: PerturbationMode::Initial })
        .collect();
    let dir = tempdir().unwrap();
    run_scenario(&spec, dir.path(), &RunContext::default()).unwrap();
    let sweep: SweepResult =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sweep.json")).unwrap()).unwrap();
    let ratios: Vec<f64> = sweep.rows.iter().map(|r| r.max_gronwall_ratio.unwrap()).collect();
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    // The ratio is exactly 1 at t = 0, where w and the envelope coincide.
    let pass = twin <= 1e-10 && worst <= 1.0 + 1e-12;
    verdict(9, pass, &format!("twin H1 gap {twin:.1e}, worst |w|^2 / envelope {worst:.4}"));
}

#[test]
fn criterion_10_exponent_robustness() {
    let mut cfg = SimulationConfig::new(8, 1.0, 0.0, 1.0, 1.0, 0.5, 0.05);
    cfg.initial = InitialCondition::TaylorGreen { amplitude: 0.8 };
    cfg.checkpoint_every = Some(1);
    let traj = simulate(&cfg).unwrap().trajectory;
    let lhs: Vec<f64> = [2.0, 1.5, 1.1, 1.01, 1.0]
        .into_iter()
        .map(|s| exponent_robustness_lhs(&traj, 1.0, s, 1.0).unwrap())
        .collect();
    let decreasing = lhs.windows(2).all(|w| w[1] < w[0]);
    // Linear vanishing in s - 1.
    let rate = lhs[3] / lhs[2];
    let vanishes = lhs[4] == 0.0 && rate < 0.2;

    let mut c = cbf_core::SpectralField::zeros(Grid::new(8).unwrap());
    c.set([0, 0, 0], [Complex64::new(2.0, 0.0), Complex64::default(), Complex64::default()])
        .unwrap();
    let closed = 2.0 * (2.0 * PI).powf(1.5);
    let got = exponent_gap_norm(&c, 1.0, 2.0);
    let rel = (got - closed).abs() / closed;
    let pass = decreasing && vanishes && rel <= 1e-8;
    verdict(
        10,
        pass,
        &format!("lhs over s = 2, 1.5, 1.1, 1.01, 1: {lhs:?}; constant field error {rel:.1e}"),
    );
}

#[test]
fn criterion_11_determinism_and_persistence() {
    let mut cfg = SimulationConfig::new(16, 0.8, 0.1, 1.0, 3.0, 0.2, 0.01);
    cfg.checkpoint_every = Some(10);
    let spec = ScenarioSpec::new(ScenarioKind::Simulate, Some(cfg.clone()));
    let fresh = tempdir().unwrap();
    run_scenario(&spec, fresh.path(), &RunContext::default()).unwrap();
    let want = fs::read(fresh.path().join("final.cbf")).unwrap();
    let fresh_csv = fs::read_to_string(fresh.path().join("diagnostics.csv")).unwrap();
    let resumed = tempdir().unwrap();
    resume(&fresh.path().join("checkpoints/step_000010.cbf"), &cfg, resumed.path(), &RunContext::default())
        .unwrap();
    let got = fs::read(resumed.path().join("final.cbf")).unwrap();
    let resumed_csv = fs::read_to_string(resumed.path().join("diagnostics.csv")).unwrap();
    // After its first row the resumed run repeats the tail of the fresh one;
    // the step counter restarts, so it is left out of the comparison.
    let drop_step = |line: &str| line.split_once(',').unwrap().1.to_string();
    let tail: Vec<String> = resumed_csv.lines().skip(2).map(drop_step).collect();
    let fresh_rows: Vec<String> = fresh_csv.lines().map(drop_step).collect();
    let rows_match = !tail.is_empty() && fresh_rows.ends_with(&tail);

    let u = field(16, 1111, 8, true);
    let header = CheckpointHeader { r: 2.5, mu: 0.3, alpha: 0.1, beta: 2.0, t: 0.123456789 };
    let bytes = checkpoint::encode(&header, &u);
    let back = checkpoint::decode(&bytes).unwrap();
    let round_trip = back.field == u && back.header == header && checkpoint::encode(&back.header, &back.field) == bytes;

    let pass = got == want && rows_match && round_trip;
    verdict(
        11,
        pass,
        &format!("resume final state identical: {}, rows identical: {rows_match}, CBF1 round trip: {round_trip}", got == want),
    );
}
