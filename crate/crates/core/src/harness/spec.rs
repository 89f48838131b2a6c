use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CbfError, Result};
use crate::integrator::{SimulationConfig, TwinOptions};
use crate::operators::SuiteSettings;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Simulate,
    Certify,
    PerturbSweep,
    InequalitySuite,
    ExponentSweep,
    TwinRun,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Certify => "certify",
            Self::PerturbSweep => "perturb_sweep",
            Self::InequalitySuite => "inequality_suite",
            Self::ExponentSweep => "exponent_sweep",
            Self::TwinRun => "twin_run",
        }
    }
}

/// Which datum of the reference problem a perturbation changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationMode {
    Initial,
    Forcing,
    /// Both, each carrying half of eps^2.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub epsilon: f64,
    pub mode: PerturbationMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentPair {
    pub r: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsChoice {
    Unit,
    #[default]
    Calibrated,
}

fn default_calibration_factors() -> Vec<f64> {
    vec![0.05, 0.2, 0.5]
}

fn default_growth_limit() -> f64 {
    10.0
}

/// A complete run description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub cbf_config_version: u32,
    /// May be omitted when the command line names the scenario.
    #[serde(default)]
    pub kind: Option<ScenarioKind>,
    /// Absent only for the inequality suite.
    #[serde(default)]
    pub base: Option<SimulationConfig>,
    #[serde(default)]
    pub perturbations: Vec<Perturbation>,
    #[serde(default)]
    pub exponent_pairs: Vec<ExponentPair>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub constants: ConstantsChoice,
    /// Calibration perturbation sizes relative to |u0|_{H^1}.
    #[serde(default = "default_calibration_factors")]
    pub calibration_factors: Vec<f64>,
    /// A certified perturbation counts as sound when sup |v|_{H^1} stays
    /// within this multiple of sup |u|_{H^1}.
    #[serde(default = "default_growth_limit")]
    pub growth_limit: f64,
    #[serde(default)]
    pub suite: SuiteSettings,
    #[serde(default)]
    pub twin: TwinOptions,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, base: Option<SimulationConfig>) -> Self {
        Self {
            cbf_config_version: CONFIG_VERSION,
            kind: Some(kind),
            base,
            perturbations: Vec::new(),
            exponent_pairs: Vec::new(),
            output_dir: None,
            seed: 0,
            constants: ConstantsChoice::default(),
            calibration_factors: default_calibration_factors(),
            growth_limit: default_growth_limit(),
            suite: SuiteSettings::default(),
            twin: TwinOptions::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| CbfError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn kind(&self) -> Result<ScenarioKind> {
        self.kind
            .ok_or_else(|| CbfError::Config("scenario kind is not set".into()))
    }

    /// The simulation config, required by every kind but the inequality suite.
    pub fn base(&self) -> Result<&SimulationConfig> {
        self.base
            .as_ref()
            .ok_or_else(|| CbfError::Config("scenario needs a `base` config".into()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.cbf_config_version != CONFIG_VERSION {
            return Err(CbfError::Config(format!(
                "unsupported cbf_config_version {}, expected {CONFIG_VERSION}",
                self.cbf_config_version
            )));
        }
        if let Some(base) = &self.base {
            base.validate()?;
        }
        if self.kind != Some(ScenarioKind::InequalitySuite) && self.kind.is_some() {
            self.base()?;
        }
        let eps: Vec<f64> = self.perturbations.iter().map(|p| p.epsilon).collect();
        if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(CbfError::Config("perturbation sizes must be positive".into()));
        }
        if eps.windows(2).any(|w| w[1] < w[0]) {
            return Err(CbfError::Config(
                "perturbations must be sorted by epsilon".into(),
            ));
        }
        for p in &self.exponent_pairs {
            if !(p.r >= 1.0) || !(p.s >= p.r) {
                return Err(CbfError::Config(format!(
                    "exponent pair needs s >= r >= 1, got r = {}, s = {}",
                    p.r, p.s
                )));
            }
        }
        if self.calibration_factors.iter().any(|f| !(*f > 0.0)) {
            return Err(CbfError::Config("calibration factors must be positive".into()));
        }
        if !(self.growth_limit > 0.0) {
            return Err(CbfError::Config("growth_limit must be positive".into()));
        }
        Ok(())
    }
}
