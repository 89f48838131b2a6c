use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::artifacts::{ArtifactWriter, Manifest};
use super::plot::{emit_plot_data, PlotData};
use super::spec::{ConstantsChoice, PerturbationMode, ScenarioKind, ScenarioSpec};
use crate::certificates::{
    calibrate, certify_pair, exponent_robustness_lhs, forcing_perturbation, gronwall_envelope,
    initial_perturbation, pair_history, Calibration, CertificateConstants, CertificateReport,
    PairHistory, Verdict,
};
use crate::checkpoint::{self, CheckpointHeader};
use crate::error::{CbfError, Result};
use crate::fields::{norm_hs, norm_l2, SpectralField};
use crate::integrator::{
    identical_twin_difference, simulate_from, twin_run_divergence, Forcing, InitialCondition,
    Outcome, SimulationConfig, SimulationResult,
};
use crate::operators::run_inequality_suite;

/// Seed offset separating sweep perturbations from calibration ones.
const SWEEP_SEED_OFFSET: u64 = 1000;

/// Settings of one invocation that are not part of the scenario itself.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunContext {
    /// Directory for resolving relative paths in the spec.
    pub base_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub deterministic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSummary {
    pub kind: ScenarioKind,
    /// 0 on success, otherwise the taxonomy of [`CbfError::exit_code`].
    pub exit_code: i32,
    pub manifest: Manifest,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub mode: PerturbationMode,
    pub lhs: f64,
    pub r_of_u: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub simulated_outcome: Outcome,
    pub sup_h1_of_difference: f64,
    pub sup_h1_of_v: f64,
    /// Largest |w(t)|^2 over the Gronwall envelope, for initial perturbations
    /// under calibrated constants.
    pub max_gronwall_ratio: Option<f64>,
}

impl SweepRow {
    pub fn certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub sup_h1_of_u: f64,
    pub growth_limit: f64,
    pub constants: CertificateConstants,
    /// Certified rows whose perturbed run failed or grew past the limit.
    pub counterexamples: usize,
}

impl SweepResult {
    /// A certified row is sound when v reaches the horizon with
    /// sup |v|_{H^1} <= growth_limit * sup |u|_{H^1}.
    pub fn is_sound(&self, row: &SweepRow) -> bool {
        row.simulated_outcome.is_completed()
            && row.sup_h1_of_v <= self.growth_limit * self.sup_h1_of_u
    }

    /// Smallest epsilon that is not certified.
    pub fn first_uncertified(&self) -> Option<&SweepRow> {
        self.rows.iter().find(|r| !r.certified())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentRow {
    pub r: f64,
    pub s: f64,
    pub lhs: f64,
}

fn header(cfg: &SimulationConfig, t: f64) -> CheckpointHeader {
    CheckpointHeader {
        r: cfg.r,
        mu: cfg.mu,
        alpha: cfg.alpha,
        beta: cfg.beta,
        t,
    }
}

/// Writes the diagnostics, the boundary states and the run outcome.
fn write_run(
    w: &mut ArtifactWriter,
    cfg: &SimulationConfig,
    run: &SimulationResult,
    intermediate: bool,
) -> Result<()> {
    w.write("diagnostics.csv", run.diagnostics.to_csv_string().as_bytes())?;
    let snaps = &run.trajectory.snapshots;
    if let Some(first) = snaps.first() {
        w.write("initial.cbf", &checkpoint::encode(&header(cfg, first.t), &first.field))?;
    }
    if let Some(last) = snaps.last() {
        w.write("final.cbf", &checkpoint::encode(&header(cfg, last.t), &last.field))?;
    }
    if intermediate && snaps.len() > 2 {
        for s in &snaps[1..snaps.len() - 1] {
            w.write(
                &format!("checkpoints/step_{:06}.cbf", s.step),
                &checkpoint::encode(&header(cfg, s.t), &s.field),
            )?;
        }
    }
    let max_residual = run
        .diagnostics
        .rows
        .iter()
        .map(|r| r.energy_residual.abs())
        .fold(0.0, f64::max);
    w.write_json(
        "outcome.json",
        &serde_json::json!({
            "outcome": run.outcome,
            "steps": run.diagnostics.rows.last().map_or(0, |r| r.step),
            "final_t": run.final_t(),
            "max_abs_energy_residual": max_residual,
        }),
    )?;
    emit_plot_data(PlotData::Diagnostics(&run.diagnostics), w)?;
    Ok(())
}

fn outcome_code(o: &Outcome) -> i32 {
    o.clone().to_error().map_or(0, |e| e.exit_code())
}

/// The reference run for pair scenarios, with every step kept.
fn reference_run(
    cfg: &SimulationConfig,
    ctx: &RunContext,
) -> Result<(SimulationConfig, SimulationResult)> {
    let mut c = cfg.clone();
    c.record_every = 1;
    c.checkpoint_every = Some(1);
    let (u0, t0) = c.initial_state(ctx.base_dir.as_deref())?;
    let run = simulate_from(&c, u0, t0)?;
    Ok((c, run))
}

fn resolve_constants(
    spec: &ScenarioSpec,
    cfg: &SimulationConfig,
    reference: &SimulationResult,
    w: &mut ArtifactWriter,
) -> Result<(CertificateConstants, Option<Calibration>)> {
    match spec.constants {
        ConstantsChoice::Unit => Ok((CertificateConstants::unit(), None)),
        ConstantsChoice::Calibrated => {
            let u0 = &reference.trajectory.snapshots[0].field;
            let scale = match norm_hs(u0, 1.0) {
                h if h > 0.0 => h,
                _ => 1.0,
            };
            let eps: Vec<f64> = spec.calibration_factors.iter().map(|f| f * scale).collect();
            let cal = calibrate(cfg, reference, &eps, spec.seed)?;
            if 2.0 * cal.difference_fit < cal.constants.c1 {
                log::info!(
                    "calibrated constant floored at {} (fit {})",
                    cal.constants.c1,
                    cal.difference_fit
                );
            }
            w.write_json("calibration.json", &cal)?;
            Ok((cal.constants.clone(), Some(cal)))
        }
    }
}

/// Perturbed data (v0, g) with robustness lhs equal to eps^2.
fn perturbed_data(
    cfg: &SimulationConfig,
    u0: &SpectralField,
    horizon: f64,
    eps: f64,
    mode: PerturbationMode,
    seed: u64,
    k: &CertificateConstants,
) -> Result<(SpectralField, Forcing)> {
    let (e_init, e_force) = match mode {
        PerturbationMode::Initial => (eps, 0.0),
        PerturbationMode::Forcing => (0.0, eps),
        PerturbationMode::Both => (eps / 2f64.sqrt(), eps / 2f64.sqrt()),
    };
    let v0 = if e_init > 0.0 {
        u0.axpy(1.0, &initial_perturbation(u0.grid(), seed, e_init))
    } else {
        u0.clone()
    };
    let g = if e_force > 0.0 {
        forcing_perturbation(&cfg.forcing, e_force, k.c0, horizon)?
    } else {
        cfg.forcing.clone()
    };
    Ok((v0, g))
}

fn run_simulate(
    cfg: &SimulationConfig,
    ctx: &RunContext,
    w: &mut ArtifactWriter,
) -> Result<(i32, Option<String>)> {
    let (u0, t0) = cfg.initial_state(ctx.base_dir.as_deref())?;
    let run = simulate_from(cfg, u0, t0)?;
    write_run(w, cfg, &run, cfg.checkpoint_every.is_some())?;
    let code = outcome_code(&run.outcome);
    Ok((code, (code != 0).then(|| format!("{:?}", run.outcome))))
}

fn run_pairs(
    spec: &ScenarioSpec,
    ctx: &RunContext,
    w: &mut ArtifactWriter,
    sweep: bool,
) -> Result<(i32, Option<String>)> {
    let (cfg, reference) = reference_run(spec.base()?, ctx)?;
    write_run(w, &cfg, &reference, false)?;
    if !reference.outcome.is_completed() {
        return Ok((
            outcome_code(&reference.outcome),
            Some(format!("reference run stopped: {:?}", reference.outcome)),
        ));
    }
    let (k, cal) = resolve_constants(spec, &cfg, &reference, w)?;
    let u0 = reference.trajectory.snapshots[0].field.clone();
    let horizon = cfg.t_end - reference.trajectory.snapshots[0].t;
    let seed = spec.seed + SWEEP_SEED_OFFSET;

    if !sweep {
        let pairs: Vec<(SpectralField, Forcing)> = if spec.perturbations.is_empty() {
            vec![(u0.clone(), cfg.forcing.clone())]
        } else {
            spec.perturbations
                .iter()
                .map(|p| perturbed_data(&cfg, &u0, horizon, p.epsilon, p.mode, seed, &k))
                .collect::<Result<_>>()?
        };
        for (i, (v0, g)) in pairs.iter().enumerate() {
            let rep = certify_pair(&cfg, &reference, v0, g, &k)?;
            w.write_json(&format!("certificate_{i:03}.json"), &rep)?;
        }
        return Ok((0, None));
    }

    let sup_u = reference.diagnostics.column(|r| r.h1).into_iter().fold(0.0, f64::max);
    let mut rows = Vec::with_capacity(spec.perturbations.len());
    for p in &spec.perturbations {
        let (v0, g) = perturbed_data(&cfg, &u0, horizon, p.epsilon, p.mode, seed, &k)?;
        let rep: CertificateReport = certify_pair(&cfg, &reference, &v0, &g, &k)?;
        let mut cfg_v = cfg.clone();
        cfg_v.forcing = g;
        let hist = pair_history(&reference.trajectory, &cfg, &cfg_v, v0.clone())?;
        let max_gronwall_ratio = match (&cal, p.mode) {
            (Some(cal), PerturbationMode::Initial) => {
                Some(gronwall_ratio(&reference, &hist, norm_l2(&u0.sub(&v0)), cal.gronwall_c))
            }
            _ => None,
        };
        rows.push(SweepRow {
            epsilon: p.epsilon,
            mode: p.mode,
            lhs: rep.lhs,
            r_of_u: rep.r_of_u,
            margin: rep.margin,
            verdict: rep.verdict,
            simulated_outcome: hist.outcome.clone(),
            sup_h1_of_difference: hist.sup_w_h1(),
            sup_h1_of_v: hist.sup_v_h1(),
            max_gronwall_ratio,
        });
    }
    let mut result = SweepResult {
        rows,
        sup_h1_of_u: sup_u,
        growth_limit: spec.growth_limit,
        constants: k,
        counterexamples: 0,
    };
    result.counterexamples = result
        .rows
        .iter()
        .filter(|r| r.certified() && !result.is_sound(r))
        .count();
    w.write_json("sweep.json", &result)?;
    if !result.rows.is_empty() {
        emit_plot_data(PlotData::Sweep(&result), w)?;
    }
    Ok((0, None))
}

/// max_t |w(t)|^2 / envelope(t); zero where both vanish.
fn gronwall_ratio(reference: &SimulationResult, hist: &PairHistory, w0_l2: f64, c: f64) -> f64 {
    let env = gronwall_envelope(&reference.diagnostics, w0_l2, c);
    hist.samples
        .iter()
        .zip(env)
        .map(|(s, e)| {
            let w2 = s.w.l2 * s.w.l2;
            if w2 == 0.0 {
                0.0
            } else {
                w2 / e
            }
        })
        .fold(0.0, f64::max)
}

fn run_exponent_sweep(
    spec: &ScenarioSpec,
    ctx: &RunContext,
    w: &mut ArtifactWriter,
) -> Result<(i32, Option<String>)> {
    let (cfg, reference) = reference_run(spec.base()?, ctx)?;
    write_run(w, &cfg, &reference, false)?;
    if !reference.outcome.is_completed() {
        return Ok((outcome_code(&reference.outcome), None));
    }
    let (k, _) = resolve_constants(spec, &cfg, &reference, w)?;
    let rows = spec
        .exponent_pairs
        .iter()
        .map(|p| {
            Ok(ExponentRow {
                r: p.r,
                s: p.s,
                lhs: exponent_robustness_lhs(&reference.trajectory, p.r, p.s, k.c0)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    w.write_json("exponent_sweep.json", &serde_json::json!({ "c0": k.c0, "rows": rows }))?;
    Ok((0, None))
}

fn run_twin(
    spec: &ScenarioSpec,
    ctx: &RunContext,
    w: &mut ArtifactWriter,
) -> Result<(i32, Option<String>)> {
    let cfg = spec.base()?;
    let (u0, t0) = cfg.initial_state(ctx.base_dir.as_deref())?;
    let identical = identical_twin_difference(cfg, &u0, t0)?;
    let report = twin_run_divergence(cfg, &u0, t0, spec.twin)?;
    w.write_json(
        "twin_report.json",
        &serde_json::json!({
            "identical_twin_difference": identical,
            "refinement_helps": report.refinement_helps(),
            "report": report,
        }),
    )?;
    Ok((0, None))
}

fn run_suite(spec: &ScenarioSpec, w: &mut ArtifactWriter) -> Result<(i32, Option<String>)> {
    let outcome = run_inequality_suite(&spec.suite)?;
    for rep in &outcome.reports {
        w.write_json(&format!("inequalities/{}.json", rep.lemma_id.as_str()), rep)?;
    }
    w.write_json("inequality_suite.json", &outcome)?;
    emit_plot_data(PlotData::Inequalities(&outcome.reports), w)?;
    if outcome.pass() {
        Ok((0, None))
    } else {
        let failed: Vec<&str> = outcome
            .reports
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.lemma_id.as_str())
            .collect();
        let err = CbfError::CheckFailed(format!("violated: {}", failed.join(", ")));
        Ok((err.exit_code(), Some(err.to_string())))
    }
}

/// Runs a scenario and writes its artifacts plus a manifest under `out`.
///
/// Failures of the physics (blow-up, unresolved tail, failed inequality
/// checks) still produce artifacts and are reported through the exit code
/// of the summary. Invalid input and IO errors are returned as errors.
pub fn run_scenario(spec: &ScenarioSpec, out: &Path, ctx: &RunContext) -> Result<ScenarioSummary> {
    spec.validate()?;
    let kind = spec.kind()?;
    let mut w = ArtifactWriter::create(out)?;
    w.write_json("scenario.json", spec)?;
    let (exit_code, message) = match kind {
        ScenarioKind::Simulate => run_simulate(spec.base()?, ctx, &mut w)?,
        ScenarioKind::Certify => run_pairs(spec, ctx, &mut w, false)?,
        ScenarioKind::PerturbSweep => run_pairs(spec, ctx, &mut w, true)?,
        ScenarioKind::InequalitySuite => run_suite(spec, &mut w)?,
        ScenarioKind::ExponentSweep => run_exponent_sweep(spec, ctx, &mut w)?,
        ScenarioKind::TwinRun => run_twin(spec, ctx, &mut w)?,
    };
    let manifest = w.finish(kind.as_str(), exit_code, serde_json::to_value(ctx)?)?;
    Ok(ScenarioSummary {
        kind,
        exit_code,
        manifest,
        message,
    })
}

/// Continues a run from a CBF1 checkpoint up to `cfg.t_end`.
///
/// The config overrides the parameters stored in the checkpoint; differences
/// are logged. The grid must match.
pub fn resume(checkpoint_path: &Path, cfg: &SimulationConfig, out: &Path, ctx: &RunContext) -> Result<ScenarioSummary> {
    let ck = checkpoint::read(checkpoint_path)?;
    let n = ck.field.grid().n();
    if n != cfg.n {
        return Err(CbfError::GridMismatch { left: cfg.n, right: n });
    }
    let h = ck.header;
    for (name, a, b) in [
        ("r", h.r, cfg.r),
        ("mu", h.mu, cfg.mu),
        ("alpha", h.alpha, cfg.alpha),
        ("beta", h.beta, cfg.beta),
    ] {
        if a.to_bits() != b.to_bits() {
            log::warn!("overriding checkpoint {name} = {a} with {b}");
        }
    }
    let mut cfg = cfg.clone();
    cfg.initial = InitialCondition::Checkpoint {
        path: checkpoint_path.to_path_buf(),
    };
    cfg.validate()?;
    let mut spec = ScenarioSpec::new(ScenarioKind::Simulate, Some(cfg.clone()));
    spec.constants = ConstantsChoice::Unit;
    let mut w = ArtifactWriter::create(out)?;
    w.write_json("scenario.json", &spec)?;
    let run = simulate_from(&cfg, ck.field, h.t)?;
    write_run(&mut w, &cfg, &run, cfg.checkpoint_every.is_some())?;
    let exit_code = outcome_code(&run.outcome);
    let manifest = w.finish("resume", exit_code, serde_json::to_value(ctx)?)?;
    Ok(ScenarioSummary {
        kind: ScenarioKind::Simulate,
        exit_code,
        manifest,
        message: (exit_code != 0).then(|| format!("{:?}", run.outcome)),
    })
}
