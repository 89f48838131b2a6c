//! Reference run against perturbed runs: certification, the empirical
//! difference history, and constant calibration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::robustness::{
    robustness_lhs, robustness_r, CertificateConstants, CertificateReport,
};
use crate::error::{CbfError, Result};
use crate::fields::{norm_l2, Grid, NormRecord, SpectralField, DOMAIN_VOLUME};
use crate::integrator::{
    Forcing, ForcingMode, Outcome, Simulation, SimulationConfig, SimulationResult, TimeStep, Trajectory,
};
use crate::random::random_divfree_h1;

/// Calibrated constants never drop below this value.
pub const CALIBRATION_FLOOR: f64 = 1.0;

/// |f(t) - g(t)|_{L^2} for two forcings on the same grid.
pub fn forcing_difference_l2(f: &Forcing, g: &Forcing, grid: Grid, t: f64) -> Result<f64> {
    let a = f.pattern(grid)?.scaled(f.envelope(t));
    let b = g.pattern(grid)?.scaled(g.envelope(t));
    Ok(norm_l2(&a.sub(&b)))
}

/// Certificate for the pair (u, v) where `run_u` solved `cfg_u` and v starts
/// from `v0` under forcing `g`. T is the span of the recorded diagnostics.
pub fn certify_pair(
    cfg_u: &SimulationConfig,
    run_u: &SimulationResult,
    v0: &SpectralField,
    g: &Forcing,
    k: &CertificateConstants,
) -> Result<CertificateReport> {
    if !run_u.outcome.is_completed() {
        return Err(CbfError::Coverage(format!(
            "reference run did not complete: {:?}",
            run_u.outcome
        )));
    }
    let diag = &run_u.diagnostics;
    let (t0, t1) = (diag.first_t().unwrap(), diag.last_t().unwrap());
    let horizon = t1 - t0;
    let u0 = &run_u
        .trajectory
        .initial()
        .ok_or_else(|| CbfError::Coverage("empty trajectory".into()))?
        .field;
    let grid = u0.grid();
    let times = diag.times();
    let fg = times
        .iter()
        .map(|&t| forcing_difference_l2(&cfg_u.forcing, g, grid, t))
        .collect::<Result<Vec<_>>>()?;
    let lhs = robustness_lhs(u0, v0, &times, &fg, k)?;
    let r_of_u = robustness_r(diag, horizon, cfg_u.r, k)?;
    Ok(CertificateReport::new(r_of_u, lhs, k.clone(), horizon))
}

/// Seeded divergence-free perturbation with |.|_{H^1} = eps, on the dealiased
/// band with spectrum slope 2.
pub fn initial_perturbation(grid: Grid, seed: u64, eps: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_divfree_h1(grid, &mut rng, grid.dealias_cutoff() as usize, 2.0, eps)
}

/// `base` plus a steady mode a (0, cos x1, 0) with c0 T |a cos x1|^2 = eps^2.
/// Time-harmonic bases are rejected since the sum is not representable.
pub fn forcing_perturbation(base: &Forcing, eps: f64, c0: f64, horizon: f64) -> Result<Forcing> {
    let a = eps * (2.0 / (c0 * horizon * DOMAIN_VOLUME)).sqrt();
    let extra = ForcingMode {
        k: [1, 0, 0],
        amplitude: [0.0, a, 0.0],
    };
    match base {
        Forcing::None => Ok(Forcing::SteadyModes { modes: vec![extra] }),
        Forcing::SteadyModes { modes } => {
            let mut modes = modes.clone();
            modes.push(extra);
            Ok(Forcing::SteadyModes { modes })
        }
        Forcing::TimeHarmonic { .. } => Err(CbfError::Config(
            "forcing perturbations need a steady base forcing".into(),
        )),
    }
}

/// One sample of the difference w = u - v together with the norms of u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub t: f64,
    pub u: NormRecord,
    pub v_h1: f64,
    pub w: NormRecord,
    /// |f - g|^2 at t.
    pub fg_sq: f64,
}

/// Difference history of a perturbed run against a reference trajectory
/// that holds a snapshot after every step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairHistory {
    pub samples: Vec<PairSample>,
    /// How the perturbed run ended.
    pub outcome: Outcome,
}

impl PairHistory {
    pub fn completed(&self) -> bool {
        self.outcome.is_completed()
    }

    pub fn sup_v_h1(&self) -> f64 {
        self.samples.iter().map(|s| s.v_h1).fold(0.0, f64::max)
    }

    pub fn sup_w_h1(&self) -> f64 {
        self.samples.iter().map(|s| s.w.h1).fold(0.0, f64::max)
    }
}

/// Runs v from `v0` under `cfg_v` in step with the reference snapshots.
///
/// Both configurations must use the same fixed step. A blow-up or tail
/// failure of v ends the history early and is recorded in `outcome`.
pub fn pair_history(
    reference: &Trajectory,
    cfg_u: &SimulationConfig,
    cfg_v: &SimulationConfig,
    v0: SpectralField,
) -> Result<PairHistory> {
    if !matches!(cfg_v.dt, TimeStep::Fixed(_)) || cfg_v.dt != cfg_u.dt {
        return Err(CbfError::Config(
            "paired runs need the same fixed dt".into(),
        ));
    }
    let snaps = &reference.snapshots;
    if snaps.windows(2).any(|w| w[1].step != w[0].step + 1) {
        return Err(CbfError::Coverage(
            "reference trajectory must hold every step".into(),
        ));
    }
    let first = snaps
        .first()
        .ok_or_else(|| CbfError::Coverage("empty reference trajectory".into()))?;
    let grid = first.field.grid();
    let mut sim = Simulation::new(cfg_v, v0, first.t)?;
    let mut samples = Vec::with_capacity(snaps.len());
    let mut outcome = Outcome::Completed;
    for (i, snap) in snaps.iter().enumerate() {
        if i > 0 {
            match sim.advance() {
                Ok(()) => {}
                Err(CbfError::BlowUp { t }) => {
                    outcome = Outcome::BlowUp { t };
                    break;
                }
                Err(CbfError::Unresolved { t, fraction }) => {
                    outcome = Outcome::TailUnresolved { t, fraction };
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let w = snap.field.sub(sim.state());
        samples.push(PairSample {
            t: snap.t,
            u: NormRecord::of(&snap.field),
            v_h1: NormRecord::of(sim.state()).h1,
            w: NormRecord::of(&w),
            fg_sq: forcing_difference_l2(&cfg_u.forcing, &cfg_v.forcing, grid, snap.t)?.powi(2),
        });
    }
    Ok(PairHistory { samples, outcome })
}

/// Largest ratio of the difference inequality
/// X' + |grad w|^2 + |A w|^2 <= c0 |f-g|^2 + c2 X^r + c3 X^3 + c1 (gamma + 1) X,
/// X = |w|_{H^1}^2, with all constants set to 1 on the right. Derivatives are
/// forward differences, the other terms interval averages.
pub fn fit_difference_inequality(h: &PairHistory, r: f64) -> f64 {
    let term = |s: &PairSample| {
        let x = s.w.h1 * s.w.h1;
        let power = if r == 1.0 { 1.0 } else { s.u.h1.powf(2.0 * (r - 1.0)) };
        let gamma = s.u.h1.powi(4) + s.u.grad_l2 * s.u.stokes_l2 + power + s.u.grad_l2 + 1.0;
        let lhs = s.w.grad_l2.powi(2) + s.w.stokes_l2.powi(2);
        let rhs = s.fg_sq + x.powf(r) + x.powi(3) + gamma * x;
        (x, lhs, rhs)
    };
    h.samples
        .windows(2)
        .filter_map(|w| {
            let (x0, l0, r0) = term(&w[0]);
            let (x1, l1, r1) = term(&w[1]);
            let dt = w[1].t - w[0].t;
            let lhs = (x1 - x0) / dt + 0.5 * (l0 + l1);
            let rhs = 0.5 * (r0 + r1);
            (rhs > 0.0).then_some(lhs / rhs)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest c with |w(t)|^2 <= |w(0)|^2 exp(c int_0^t (|u|^2 + |A u|^2)) on
/// the history.
pub fn fit_gronwall(h: &PairHistory) -> f64 {
    let Some(first) = h.samples.first() else {
        return f64::NEG_INFINITY;
    };
    let w0 = first.w.l2 * first.w.l2;
    let mut integral = 0.0;
    let mut best = f64::NEG_INFINITY;
    for w in h.samples.windows(2) {
        let h2 = |s: &PairSample| s.u.l2 * s.u.l2 + s.u.stokes_l2 * s.u.stokes_l2;
        integral += 0.5 * (w[1].t - w[0].t) * (h2(&w[0]) + h2(&w[1]));
        let ratio = (w[1].w.l2 * w[1].w.l2) / w0;
        if integral > 0.0 && w0 > 0.0 {
            best = best.max(ratio.ln() / integral);
        }
    }
    best
}

/// Largest (X' + |A u|^2) / X^3 with X = |u|_{H^1}^2 along a run, the ratio
/// controlled by the local existence argument.
pub fn fit_existence_inequality(run: &SimulationResult) -> f64 {
    run.diagnostics
        .rows
        .windows(2)
        .filter_map(|w| {
            let x0 = w[0].h1 * w[0].h1;
            let x1 = w[1].h1 * w[1].h1;
            let dt = w[1].t - w[0].t;
            let lhs = (x1 - x0) / dt + 0.5 * (w[0].stokes_l2.powi(2) + w[1].stokes_l2.powi(2));
            let rhs = 0.5 * (x0.powi(3) + x1.powi(3));
            (rhs > 0.0).then_some(lhs / rhs)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// 2x headroom over a fitted ratio, floored at [`CALIBRATION_FLOOR`].
pub fn with_headroom(fit: f64) -> f64 {
    if fit.is_finite() {
        (2.0 * fit).max(CALIBRATION_FLOOR)
    } else {
        CALIBRATION_FLOOR
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub constants: CertificateConstants,
    /// Fitted ratio before headroom and floor.
    pub difference_fit: f64,
    /// Gronwall constant with 2x headroom, floored at zero.
    pub gronwall_c: f64,
    pub gronwall_fit: f64,
    /// Constant for the local existence horizon.
    pub existence_c: f64,
    pub existence_fit: f64,
    pub library: Vec<f64>,
}

/// Fits the constants along perturbed runs around `reference`, one per
/// entry of `epsilons` (initial perturbations, seeds `seed + 1 + i`).
///
/// The difference inequality uses a single constant for c0, c1, c3 and c_r;
/// c2 and c_R follow from the proof-level mapping.
pub fn calibrate(
    cfg: &SimulationConfig,
    reference: &SimulationResult,
    epsilons: &[f64],
    seed: u64,
) -> Result<Calibration> {
    if epsilons.is_empty() {
        return Err(CbfError::InvalidArgument("calibration needs at least one run".into()));
    }
    let u0 = &reference
        .trajectory
        .initial()
        .ok_or_else(|| CbfError::Coverage("empty reference trajectory".into()))?
        .field;
    let (mut diff_fit, mut gron_fit) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (i, &eps) in epsilons.iter().enumerate() {
        let v0 = u0.axpy(1.0, &initial_perturbation(u0.grid(), seed + 1 + i as u64, eps));
        let hist = pair_history(&reference.trajectory, cfg, cfg, v0)?;
        if !hist.completed() {
            return Err(CbfError::CheckFailed(format!(
                "calibration run with eps = {eps} did not complete"
            )));
        }
        diff_fit = diff_fit.max(fit_difference_inequality(&hist, cfg.r));
        gron_fit = gron_fit.max(fit_gronwall(&hist));
    }
    let lambda = with_headroom(diff_fit);
    let existence_fit = fit_existence_inequality(reference);
    let source = format!(
        "seed {seed}, n {}, r {}, eps {:?}",
        cfg.n, cfg.r, epsilons
    );
    Ok(Calibration {
        constants: CertificateConstants::from_proof(lambda, lambda, lambda, lambda, source),
        difference_fit: diff_fit,
        gronwall_c: if gron_fit.is_finite() { (2.0 * gron_fit).max(0.0) } else { 0.0 },
        gronwall_fit: gron_fit,
        existence_c: with_headroom(existence_fit),
        existence_fit,
        library: epsilons.to_vec(),
    })
}
