use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::checkpoint;
use crate::error::{CbfError, Result};
use crate::fields::{Grid, SpectralField};
use crate::random::random_divfree_h1;

/// Time-step policy: a fixed positive step or `"adaptive"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Fixed(f64),
    Adaptive,
}

impl Serialize for TimeStep {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TimeStep::Fixed(dt) => s.serialize_f64(*dt),
            TimeStep::Adaptive => s.serialize_str("adaptive"),
        }
    }
}

impl<'de> Deserialize<'de> for TimeStep {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(dt) => Ok(TimeStep::Fixed(dt)),
            Raw::Word(w) if w == "adaptive" => Ok(TimeStep::Adaptive),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "dt must be a number or \"adaptive\", got {w:?}"
            ))),
        }
    }
}

/// One real Fourier mode, amplitude * cos(k . x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingMode {
    pub k: [i64; 3],
    pub amplitude: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Forcing {
    #[default]
    None,
    /// Sum of the modes, constant in time.
    SteadyModes { modes: Vec<ForcingMode> },
    /// The steady pattern times cos(omega t).
    TimeHarmonic { modes: Vec<ForcingMode>, omega: f64 },
}

impl Forcing {
    pub fn is_time_dependent(&self) -> bool {
        matches!(self, Forcing::TimeHarmonic { .. })
    }

    fn modes(&self) -> &[ForcingMode] {
        match self {
            Forcing::None => &[],
            Forcing::SteadyModes { modes } | Forcing::TimeHarmonic { modes, .. } => modes,
        }
    }

    /// Spatial pattern F with f(t) = F * envelope(t).
    pub fn pattern(&self, grid: Grid) -> Result<SpectralField> {
        let mut f = SpectralField::zeros(grid);
        for m in self.modes() {
            let neg = [-m.k[0], -m.k[1], -m.k[2]];
            let (Some(a), Some(b)) = (grid.index_of(m.k), grid.index_of(neg)) else {
                return Err(CbfError::Config(format!(
                    "forcing wavevector {:?} is not on the {}^3 lattice",
                    m.k,
                    grid.n()
                )));
            };
            for c in 0..3 {
                let half = Complex64::new(0.5 * m.amplitude[c], 0.0);
                f.coeffs[c][a] += half;
                f.coeffs[c][b] += half;
            }
        }
        Ok(f)
    }

    pub fn envelope(&self, t: f64) -> f64 {
        match self {
            Forcing::TimeHarmonic { omega, .. } => (omega * t).cos(),
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Zero,
    /// amplitude * (sin x1 cos x2 cos x3, -cos x1 sin x2 cos x3, 0).
    TaylorGreen { amplitude: f64 },
    /// Zero-mean divergence-free field with |u_k| ~ |k|^{-slope} on
    /// max_j |k_j| <= kmax, scaled to the given H^1 norm.
    RandomDivfree {
        seed: u64,
        slope: f64,
        #[serde(default)]
        kmax: Option<usize>,
        #[serde(default = "default_h1")]
        h1: f64,
    },
    /// A CBF1 file; relative paths resolve against the config's directory.
    Checkpoint { path: PathBuf },
}

fn default_h1() -> f64 {
    1.0
}

fn default_cfl() -> f64 {
    0.5
}

fn default_true() -> bool {
    true
}

fn default_one() -> usize {
    1
}

fn default_tail_limit() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub n: usize,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub r: f64,
    pub t_end: f64,
    pub dt: TimeStep,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Upper bound on adaptive steps; defaults to a tenth of the horizon.
    #[serde(default)]
    pub dt_max: Option<f64>,
    #[serde(default)]
    pub forcing: Forcing,
    pub initial: InitialCondition,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default = "default_one")]
    pub record_every: usize,
    /// Trajectory snapshot interval in steps; only the initial and final
    /// states are kept when absent.
    #[serde(default)]
    pub checkpoint_every: Option<usize>,
    /// Largest tolerated spectral tail fraction before the run stops.
    #[serde(default = "default_tail_limit")]
    pub tail_limit: f64,
}

impl SimulationConfig {
    /// A config with common defaults: Taylor-Green data, no forcing.
    pub fn new(n: usize, mu: f64, alpha: f64, beta: f64, r: f64, t_end: f64, dt: f64) -> Self {
        Self {
            n,
            mu,
            alpha,
            beta,
            r,
            t_end,
            dt: TimeStep::Fixed(dt),
            cfl: default_cfl(),
            dt_max: None,
            forcing: Forcing::None,
            initial: InitialCondition::TaylorGreen { amplitude: 1.0 },
            dealias: true,
            record_every: 1,
            checkpoint_every: None,
            tail_limit: default_tail_limit(),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n).map_err(|e| CbfError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CbfError::Config(m));
        let grid = self.grid()?;
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be positive, got {}", self.mu));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be nonnegative, got {v}"));
            }
        }
        if !(self.r >= 1.0 && self.r.is_finite()) {
            return bad(format!("r must be >= 1, got {}", self.r));
        }
        if self.r > 3.0 {
            log::warn!("r = {} exceeds 3; accepted, outside the tested range", self.r);
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if let Some(m) = self.dt_max {
            if !(m > 0.0 && m.is_finite()) {
                return bad(format!("dt_max must be positive, got {m}"));
            }
        }
        if self.record_every == 0 || self.checkpoint_every == Some(0) {
            return bad("record_every and checkpoint_every must be at least 1".into());
        }
        if !(self.tail_limit > 0.0) {
            return bad(format!("tail_limit must be positive, got {}", self.tail_limit));
        }
        if let Forcing::TimeHarmonic { omega, .. } = self.forcing {
            if !omega.is_finite() {
                return bad("omega must be finite".into());
            }
        }
        let cut = grid.dealias_cutoff();
        for m in self.forcing.modes() {
            if m.amplitude.iter().any(|a| !a.is_finite()) {
                return bad(format!("forcing amplitude {:?} is not finite", m.amplitude));
            }
            if self.dealias && m.k.iter().any(|k| k.abs() > cut) {
                return bad(format!(
                    "forcing wavevector {:?} lies outside the dealiased band |k_j| <= {cut}",
                    m.k
                ));
            }
        }
        self.forcing.pattern(grid)?;
        match &self.initial {
            InitialCondition::TaylorGreen { amplitude } if !amplitude.is_finite() => {
                return bad("Taylor-Green amplitude must be finite".into());
            }
            InitialCondition::RandomDivfree { kmax, h1, slope, .. } => {
                if !(h1.is_finite() && *h1 >= 0.0) || !slope.is_finite() {
                    return bad("random initial data needs finite slope and h1 >= 0".into());
                }
                if let Some(k) = kmax {
                    if *k == 0 || (self.dealias && *k as i64 > cut) {
                        return bad(format!("kmax must lie in 1..={cut}, got {k}"));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Initial state and start time. `base` resolves relative checkpoint paths.
    pub fn initial_state(&self, base: Option<&Path>) -> Result<(SpectralField, f64)> {
        let grid = self.grid()?;
        let u = match &self.initial {
            InitialCondition::Zero => SpectralField::zeros(grid),
            InitialCondition::TaylorGreen { amplitude } => taylor_green(grid, *amplitude),
            InitialCondition::RandomDivfree {
                seed,
                slope,
                kmax,
                h1,
            } => {
                let kmax = kmax.unwrap_or(grid.dealias_cutoff() as usize);
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                random_divfree_h1(grid, &mut rng, kmax, *slope, *h1)
            }
            InitialCondition::Checkpoint { path } => {
                let full = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                let ck = checkpoint::read(&full)?;
                if ck.field.grid() != grid {
                    return Err(CbfError::GridMismatch {
                        left: grid.n(),
                        right: ck.field.grid().n(),
                    });
                }
                // Loaded as stored so a resumed run matches the uninterrupted one bit
                // for bit.
                return Ok((ck.field, ck.header.t));
            }
        };
        Ok((u, 0.0))
    }
}

/// amplitude * (sin x1 cos x2 cos x3, -cos x1 sin x2 cos x3, 0), set exactly on
/// the eight modes (+-1, +-1, +-1).
pub fn taylor_green(grid: Grid, amplitude: f64) -> SpectralField {
    let mut u = SpectralField::zeros(grid);
    for s1 in [-1i64, 1] {
        for s2 in [-1i64, 1] {
            for s3 in [-1i64, 1] {
                let idx = grid.index_of([s1, s2, s3]).expect("grid holds |k| = 1");
                u.coeffs[0][idx] = Complex64::new(0.0, -(s1 as f64) * amplitude / 8.0);
                u.coeffs[1][idx] = Complex64::new(0.0, (s2 as f64) * amplitude / 8.0);
            }
        }
    }
    u
}
