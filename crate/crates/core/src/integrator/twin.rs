use serde::{Deserialize, Serialize};

use super::config::{SimulationConfig, TimeStep};
use super::stepper::Simulation;
use crate::error::{CbfError, Result};
use crate::fields::{norm_hs, SpectralField};

/// H^1 norm of u - v, padding the coarser field onto the finer lattice.
pub fn h1_distance(u: &SpectralField, v: &SpectralField) -> f64 {
    let (a, b) = if u.grid().n() >= v.grid().n() {
        (u.clone(), v.padded(u.grid()))
    } else {
        (u.padded(v.grid()), v.clone())
    };
    norm_hs(&a.sub(&b), 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwinOptions {
    /// Number of step sizes dt, dt/2, ... compared (at least 2).
    pub time_levels: usize,
    /// Number of grids n, 2n, ... compared (at least 2).
    pub space_levels: usize,
}

impl Default for TwinOptions {
    fn default() -> Self {
        Self {
            time_levels: 3,
            space_levels: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinReport {
    /// sup_t ||u_{dt/2^l} - u_{dt/2^{l+1}}||_{H^1} at the coarse step times.
    pub time_differences: Vec<f64>,
    /// Successive quotients of `time_differences`; below 1 when refining helps.
    pub time_ratios: Vec<f64>,
    /// log2 of the first inverse ratio, the observed temporal order.
    pub time_order: Option<f64>,
    /// sup_t ||u_{2^l n} - u_{2^{l+1} n}||_{H^1}.
    pub space_differences: Vec<f64>,
    pub space_ratios: Vec<f64>,
    /// Differences at the final time only.
    pub final_time_differences: Vec<f64>,
}

impl TwinReport {
    pub fn refinement_helps(&self) -> bool {
        self.time_ratios
            .iter()
            .chain(&self.space_ratios)
            .all(|r| *r < 1.0)
    }
}

fn ratios(d: &[f64]) -> Vec<f64> {
    d.windows(2).map(|w| w[1] / w[0]).collect()
}

/// Runs the levels in lockstep on the coarse step times and returns the
/// supremum and final value of each consecutive H^1 difference.
fn lockstep(mut sims: Vec<Simulation>, substeps: &[u64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let pairs = sims.len() - 1;
    let diffs = |sims: &[Simulation]| -> Vec<f64> {
        (0..pairs)
            .map(|i| h1_distance(sims[i].state(), sims[i + 1].state()))
            .collect()
    };
    let mut sup = diffs(&sims);
    let mut last = sup.clone();
    while !sims[0].finished() {
        for (sim, &m) in sims.iter_mut().zip(substeps) {
            for _ in 0..m {
                if sim.finished() {
                    break;
                }
                sim.advance()?;
            }
        }
        last = diffs(&sims);
        for (s, d) in sup.iter_mut().zip(&last) {
            *s = s.max(*d);
        }
    }
    Ok((sup, last))
}

/// sup_t of the H^1 distance between two independent runs of the same data.
/// Zero whenever the solver is deterministic.
pub fn identical_twin_difference(
    cfg: &SimulationConfig,
    u0: &SpectralField,
    t0: f64,
) -> Result<f64> {
    let sims = vec![
        Simulation::new(cfg, u0.clone(), t0)?,
        Simulation::new(cfg, u0.clone(), t0)?,
    ];
    Ok(lockstep(sims, &[1, 1])?.0[0])
}

/// Compares runs of the same data under time and space refinement.
///
/// Temporal levels use dt / 2^l on the base grid; spatial levels use the base
/// step on grids 2^l n, with the initial field padded from the base grid so
/// every level starts from identical data.
pub fn twin_run_divergence(
    cfg: &SimulationConfig,
    u0: &SpectralField,
    t0: f64,
    opts: TwinOptions,
) -> Result<TwinReport> {
    let TimeStep::Fixed(dt) = cfg.dt else {
        return Err(CbfError::Config("twin runs need a fixed dt".into()));
    };
    if opts.time_levels < 2 || opts.space_levels < 2 {
        return Err(CbfError::Config("twin runs need at least two levels".into()));
    }
    let mut sims = Vec::new();
    let mut subs = Vec::new();
    for l in 0..opts.time_levels {
        let mut c = cfg.clone();
        c.dt = TimeStep::Fixed(dt / (1u64 << l) as f64);
        sims.push(Simulation::new(&c, u0.clone(), t0)?);
        subs.push(1u64 << l);
    }
    let (time_differences, final_time) = lockstep(sims, &subs)?;

    let mut sims = Vec::new();
    for l in 0..opts.space_levels {
        let mut c = cfg.clone();
        c.n = cfg.n << l;
        let grid = c.grid()?;
        sims.push(Simulation::new(&c, u0.padded(grid), t0)?);
    }
    let ones = vec![1; opts.space_levels];
    let (space_differences, final_space) = lockstep(sims, &ones)?;

    let time_ratios = ratios(&time_differences);
    let time_order = time_ratios
        .first()
        .filter(|r| **r > 0.0)
        .map(|r| -r.log2());
    let mut final_time_differences = final_time;
    final_time_differences.extend(final_space);
    Ok(TwinReport {
        time_ratios,
        time_order,
        space_ratios: ratios(&space_differences),
        time_differences,
        space_differences,
        final_time_differences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::config::taylor_green;
    use num_complex::Complex64;

    #[test]
    fn linear_case_is_exact_under_time_refinement() {
        let mut cfg = SimulationConfig::new(8, 0.5, 0.0, 0.0, 3.0, 0.5, 0.1);
        cfg.dealias = true;
        let g = cfg.grid().unwrap();
        let mut u = SpectralField::zeros(g);
        let z = Complex64::default();
        u.set_real_mode([0, 1, 0], [Complex64::new(0.0, -0.5), z, z]).unwrap();
        let rep = twin_run_divergence(&cfg, &u, 0.0, TwinOptions::default()).unwrap();
        assert!(rep.time_differences.iter().all(|d| *d < 1e-12), "{rep:?}");
        assert!(rep.space_differences.iter().all(|d| *d < 1e-12), "{rep:?}");
    }

    #[test]
    fn nonlinear_differences_shrink() {
        let cfg = SimulationConfig::new(8, 0.2, 0.0, 1.0, 3.0, 0.4, 0.1);
        let u = taylor_green(cfg.grid().unwrap(), 1.0);
        let rep = twin_run_divergence(
            &cfg,
            &u,
            0.0,
            TwinOptions {
                time_levels: 3,
                space_levels: 2,
            },
        )
        .unwrap();
        assert!(rep.time_ratios[0] < 1.0, "{rep:?}");
        assert!(rep.time_order.unwrap() > 1.5, "{rep:?}");
    }

    #[test]
    fn identical_twins_coincide() {
        let cfg = SimulationConfig::new(8, 0.2, 0.1, 1.0, 3.0, 0.2, 0.05);
        let u = taylor_green(cfg.grid().unwrap(), 1.0);
        assert_eq!(identical_twin_difference(&cfg, &u, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn distance_pads_coarse_field() {
        let cfg = SimulationConfig::new(8, 1.0, 0.0, 0.0, 3.0, 1.0, 0.1);
        let u = taylor_green(cfg.grid().unwrap(), 1.0);
        let big = u.padded(cfg.grid().unwrap().doubled());
        assert_eq!(h1_distance(&u, &big), 0.0);
        assert_eq!(h1_distance(&big, &u), 0.0);
    }
}
