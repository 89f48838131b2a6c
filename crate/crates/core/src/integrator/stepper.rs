use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{SimulationConfig, TimeStep};
use super::diagnostics::{trapezoid, DiagnosticsRow, DiagnosticsSeries};
use crate::error::{CbfError, Result};
use crate::fields::{norm_hs, norm_lp_spectral, to_physical, Grid, NormRecord, SpectralField};
use crate::operators::{absorption_self, convective_with, leray_project, tail_fraction};

/// States with an H^1 norm above this are treated as blown up.
pub const BLOWUP_H1: f64 = 1e100;

/// Integrating-factor midpoint scheme for
/// du/dt + (mu A + alpha) u = -B(u, u) - beta C_r(u) + P f.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Grid,
    beta: f64,
    r: f64,
    dealias: bool,
    symbol: Vec<f64>,
    forcing: Option<SpectralField>,
    envelope: super::config::Forcing,
}

impl Stepper {
    pub fn new(cfg: &SimulationConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid()?;
        let symbol = (0..grid.len())
            .map(|i| cfg.mu * grid.k_squared(i) + cfg.alpha)
            .collect();
        let pattern = leray_project(&cfg.forcing.pattern(grid)?);
        let forcing = (pattern.max_abs_coeff() > 0.0).then_some(pattern);
        Ok(Self {
            grid,
            beta: cfg.beta,
            r: cfg.r,
            dealias: cfg.dealias,
            symbol,
            forcing,
            envelope: cfg.forcing.clone(),
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Projected forcing at time t, `None` when there is no forcing.
    pub fn forcing_at(&self, t: f64) -> Option<SpectralField> {
        self.forcing
            .as_ref()
            .map(|f| f.scaled(self.envelope.envelope(t)))
    }

    fn decay(&self, u: &SpectralField, h: f64) -> SpectralField {
        let factors: Vec<f64> = self.symbol.iter().map(|s| (-s * h).exp()).collect();
        u.scale_modes(|i| factors[i])
    }

    /// Nonlinear and forcing terms, truncated by the 2/3 rule when dealiasing.
    pub fn rhs(&self, u: &SpectralField, t: f64) -> Result<SpectralField> {
        let mut n = convective_with(u, u, self.dealias)?.scaled(-1.0);
        if self.beta != 0.0 {
            n.axpy_in_place(-self.beta, &absorption_self(u, self.r)?);
        }
        if let Some(f) = &self.forcing {
            n.axpy_in_place(self.envelope.envelope(t), f);
        }
        Ok(if self.dealias { n.dealiased() } else { n })
    }

    /// One step of size h from time t:
    /// u* = E(h/2)(u + h/2 N(u, t)), u' = E(h) u + h E(h/2) N(u*, t + h/2).
    pub fn step(&self, u: &SpectralField, t: f64, h: f64) -> Result<SpectralField> {
        if !(h > 0.0) {
            return Err(CbfError::InvalidArgument(format!("dt must be positive, got {h}")));
        }
        let n0 = self.rhs(u, t)?;
        let half = self.decay(&u.axpy(0.5 * h, &n0), 0.5 * h);
        let n1 = self.rhs(&half, t + 0.5 * h)?;
        let mut out = self.decay(u, h);
        out.axpy_in_place(h, &self.decay(&n1, 0.5 * h));
        Ok(out)
    }
}

/// One step of the scheme; non-finite output is reported as blow-up.
pub fn step(u: &SpectralField, t: f64, dt: f64, cfg: &SimulationConfig) -> Result<SpectralField> {
    let out = Stepper::new(cfg)?.step(u, t, dt)?;
    if !out.is_finite() {
        return Err(CbfError::BlowUp { t: t + dt });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    BlowUp { t: f64 },
    TailUnresolved { t: f64, fraction: f64 },
}

impl Outcome {
    pub fn is_completed(&self) -> bool {
        matches!(self, Outcome::Completed)
    }

    pub fn to_error(self) -> Option<CbfError> {
        match self {
            Outcome::Completed => None,
            Outcome::BlowUp { t } => Some(CbfError::BlowUp { t }),
            Outcome::TailUnresolved { t, fraction } => Some(CbfError::Unresolved { t, fraction }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: u64,
    pub t: f64,
    pub field: SpectralField,
}

/// States at the configured interval. The first entry is the initial state
/// and the last is the final (or last finite) state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn initial(&self) -> Option<&Snapshot> {
        self.snapshots.first()
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub trajectory: Trajectory,
    pub diagnostics: DiagnosticsSeries,
    pub outcome: Outcome,
}

impl SimulationResult {
    pub fn final_state(&self) -> &SpectralField {
        &self.trajectory.last().expect("trajectory holds the initial state").field
    }

    pub fn final_t(&self) -> f64 {
        self.trajectory.last().expect("trajectory holds the initial state").t
    }
}

/// An in-progress run that can be advanced one step at a time.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: SimulationConfig,
    stepper: Stepper,
    u: SpectralField,
    t: f64,
    steps: u64,
    last_dt: f64,
}

impl Simulation {
    pub fn new(cfg: &SimulationConfig, u0: SpectralField, t0: f64) -> Result<Self> {
        let stepper = Stepper::new(cfg)?;
        if u0.grid() != stepper.grid() {
            return Err(CbfError::GridMismatch {
                left: stepper.grid().n(),
                right: u0.grid().n(),
            });
        }
        if !(t0 < cfg.t_end) {
            return Err(CbfError::Config(format!(
                "start time {t0} is not before t_end = {}",
                cfg.t_end
            )));
        }
        Ok(Self {
            cfg: cfg.clone(),
            stepper,
            u: u0,
            t: t0,
            steps: 0,
            last_dt: 0.0,
        })
    }

    pub fn state(&self) -> &SpectralField {
        &self.u
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn last_dt(&self) -> f64 {
        self.last_dt
    }

    pub fn stepper(&self) -> &Stepper {
        &self.stepper
    }

    pub fn finished(&self) -> bool {
        self.t >= self.cfg.t_end
    }

    /// Step size the next call to [`Simulation::advance`] will use.
    pub fn next_dt(&self) -> f64 {
        let cfg = &self.cfg;
        let nominal = match cfg.dt {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Adaptive => {
                let dt_max = cfg.dt_max.unwrap_or(0.1 * cfg.t_end);
                let umax = to_physical(&self.u).max_magnitude();
                let mut h = dt_max;
                if umax > 0.0 {
                    h = h.min(cfg.cfl * self.stepper.grid().spacing() / umax);
                    if cfg.beta > 0.0 {
                        let rate = cfg.beta * if cfg.r == 1.0 { 1.0 } else { umax.powf(cfg.r - 1.0) };
                        h = h.min(cfg.cfl / rate);
                    }
                }
                h
            }
        };
        let remaining = self.cfg.t_end - self.t;
        if remaining <= nominal * (1.0 + 1e-9) {
            remaining
        } else {
            nominal
        }
    }

    /// Takes one step. Fails with `BlowUp` or `Unresolved` without changing
    /// the state.
    pub fn advance(&mut self) -> Result<()> {
        let h = self.next_dt();
        let t_new = if h == self.cfg.t_end - self.t {
            self.cfg.t_end
        } else {
            self.t + h
        };
        let next = self.stepper.step(&self.u, self.t, h)?;
        if !next.is_finite() || !(norm_hs(&next, 1.0) <= BLOWUP_H1) {
            return Err(CbfError::BlowUp { t: t_new });
        }
        let fraction = tail_fraction(&next);
        if fraction > self.cfg.tail_limit {
            return Err(CbfError::Unresolved { t: t_new, fraction });
        }
        self.u = next;
        self.t = t_new;
        self.steps += 1;
        self.last_dt = h;
        Ok(())
    }

    /// Diagnostics for the current state.
    pub fn record(&self) -> Result<DiagnosticsRow> {
        let norms = NormRecord::of(&self.u);
        let forcing_power = self
            .stepper
            .forcing_at(self.t)
            .map_or(0.0, |f| f.inner(&self.u));
        Ok(DiagnosticsRow {
            step: self.steps,
            t: self.t,
            dt: self.last_dt,
            l2: norms.l2,
            grad_l2: norms.grad_l2,
            h1: norms.h1,
            stokes_l2: norms.stokes_l2,
            lr1: norm_lp_spectral(&self.u, self.cfg.r + 1.0)?,
            energy_residual: 0.0,
            tail_fraction: tail_fraction(&self.u),
            forcing_power,
        })
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            step: self.steps,
            t: self.t,
            field: self.u.clone(),
        }
    }

    /// Runs to `t_end`, recording diagnostics and snapshots.
    pub fn run(mut self) -> Result<SimulationResult> {
        let mut diagnostics = DiagnosticsSeries::default();
        let mut trajectory = Trajectory::default();
        diagnostics.rows.push(self.record()?);
        trajectory.snapshots.push(self.snapshot());
        let mut outcome = Outcome::Completed;
        while !self.finished() {
            match self.advance() {
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
            let s = self.steps as usize;
            if s % self.cfg.record_every == 0 || self.finished() {
                diagnostics.rows.push(self.record()?);
            }
            if let Some(every) = self.cfg.checkpoint_every {
                if s % every == 0 && !self.finished() {
                    trajectory.snapshots.push(self.snapshot());
                }
            }
        }
        if diagnostics.rows.last().map(|r| r.step) != Some(self.steps) {
            diagnostics.rows.push(self.record()?);
        }
        if self.steps > 0 {
            trajectory.snapshots.push(self.snapshot());
        }
        let residuals = energy_balance_residual(&diagnostics, &self.cfg);
        for (row, res) in diagnostics.rows.iter_mut().skip(1).zip(residuals) {
            row.energy_residual = res;
        }
        Ok(SimulationResult {
            trajectory,
            diagnostics,
            outcome,
        })
    }
}

/// Runs a configuration from its own initial condition.
pub fn simulate(cfg: &SimulationConfig) -> Result<SimulationResult> {
    simulate_in(cfg, None)
}

/// [`simulate`] with relative checkpoint paths resolved against `base`.
pub fn simulate_in(cfg: &SimulationConfig, base: Option<&Path>) -> Result<SimulationResult> {
    cfg.validate()?;
    let (u0, t0) = cfg.initial_state(base)?;
    simulate_from(cfg, u0, t0)
}

pub fn simulate_from(cfg: &SimulationConfig, u0: SpectralField, t0: f64) -> Result<SimulationResult> {
    Simulation::new(cfg, u0, t0)?.run()
}

/// Signed energy balance residual for each recording interval [t0, t1]:
/// 1/2 |u(t1)|^2 - 1/2 |u(t0)|^2 + int (mu |grad u|^2 + alpha |u|^2
/// + beta |u|_{L^{r+1}}^{r+1}) - int <f, u>, trapezoidal in time.
pub fn energy_balance_residual(diag: &DiagnosticsSeries, cfg: &SimulationConfig) -> Vec<f64> {
    let dissipation = |row: &DiagnosticsRow| {
        cfg.mu * row.grad_l2.powi(2) + cfg.alpha * row.l2.powi(2) + cfg.beta * row.lr1.powf(cfg.r + 1.0)
    };
    diag.rows
        .windows(2)
        .map(|w| {
            let t = [w[0].t, w[1].t];
            let work = trapezoid(&t, &[dissipation(&w[0]), dissipation(&w[1])])
                - trapezoid(&t, &[w[0].forcing_power, w[1].forcing_power]);
            0.5 * (w[1].l2.powi(2) - w[0].l2.powi(2)) + work
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::config::InitialCondition;
    use crate::random::random_divfree_h1;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sine_mode(g: Grid, a: f64) -> SpectralField {
        let mut u = SpectralField::zeros(g);
        let z = Complex64::default();
        u.set_real_mode([1, 0, 0], [z, Complex64::new(0.0, -0.5 * a), z])
            .unwrap();
        u
    }

    #[test]
    fn linear_eigenmode_decays_exactly() {
        let mut cfg = SimulationConfig::new(8, 0.7, 0.2, 0.0, 3.0, 1.0, 0.1);
        cfg.initial = InitialCondition::Zero;
        let g = cfg.grid().unwrap();
        let u = sine_mode(g, 1.0);
        let out = step(&u, 0.0, 0.1, &cfg).unwrap();
        let want = u.scaled((-(0.7 + 0.2) * 0.1f64).exp());
        assert!(out.sub(&want).max_abs_coeff() < 1e-16);
    }

    #[test]
    fn zero_stays_zero() {
        let mut cfg = SimulationConfig::new(8, 1.0, 0.0, 1.0, 3.0, 0.2, 0.05);
        cfg.initial = InitialCondition::Zero;
        let res = simulate(&cfg).unwrap();
        assert!(res.outcome.is_completed());
        assert_eq!(res.diagnostics.len(), 5);
        assert_eq!(res.final_state().max_abs_coeff(), 0.0);
        assert!(res.diagnostics.rows.iter().all(|r| r.h1 == 0.0 && r.energy_residual == 0.0));
    }

    #[test]
    fn fixed_steps_land_on_t_end() {
        let mut cfg = SimulationConfig::new(8, 1.0, 0.0, 1.0, 3.0, 0.25, 0.1);
        cfg.initial = InitialCondition::TaylorGreen { amplitude: 0.5 };
        let res = simulate(&cfg).unwrap();
        let t = res.diagnostics.times();
        assert_eq!(t.len(), 4);
        assert_eq!(*t.last().unwrap(), 0.25);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(res.trajectory.snapshots.len(), 2);
    }

    #[test]
    fn adaptive_steps_respect_limits() {
        let mut cfg = SimulationConfig::new(16, 0.1, 0.0, 2.0, 2.0, 0.3, 1.0);
        cfg.dt = TimeStep::Adaptive;
        cfg.cfl = 0.5;
        cfg.initial = InitialCondition::TaylorGreen { amplitude: 3.0 };
        let g = cfg.grid().unwrap();
        let u0 = super::super::config::taylor_green(g, 3.0);
        let sim = Simulation::new(&cfg, u0, 0.0).unwrap();
        let umax = to_physical(sim.state()).max_magnitude();
        let want = (0.5 * g.spacing() / umax).min(0.5 / (2.0 * umax)).min(0.03);
        assert!((sim.next_dt() - want).abs() < 1e-15);
        let res = sim.run().unwrap();
        assert!(res.outcome.is_completed());
        assert_eq!(res.final_t(), 0.3);
    }

    #[test]
    fn steps_preserve_divergence_free() {
        let cfg = SimulationConfig::new(16, 0.05, 0.1, 1.0, 2.5, 0.1, 0.02);
        let g = cfg.grid().unwrap();
        let u = random_divfree_h1(g, &mut ChaCha8Rng::seed_from_u64(3), 5, 1.0, 5.0);
        let mut sim = Simulation::new(&cfg, u, 0.0).unwrap();
        while !sim.finished() {
            sim.advance().unwrap();
            let s = sim.state();
            assert!(s.divergence_defect() <= 1e-10 * crate::fields::norm_l2(s));
            assert!(s.hermitian_defect() < 1e-14);
        }
    }

    #[test]
    fn nan_state_is_blow_up() {
        let cfg = SimulationConfig::new(8, 1.0, 0.0, 1.0, 3.0, 1.0, 0.1);
        let mut u = SpectralField::zeros(cfg.grid().unwrap());
        u.coeffs[0][1] = Complex64::new(f64::NAN, 0.0);
        assert_eq!(step(&u, 0.0, 0.1, &cfg).unwrap_err().exit_code(), 3);
    }
}
