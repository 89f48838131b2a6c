use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bracket::{dissipation_bracket, grad_l6_ratio, GRAD_L6_CONSTANT};
use super::pointwise::{difference_bound_check, monotonicity_gap, power_mean_fact, Vec3};
use crate::error::Result;
use crate::fields::Grid;
use crate::random::{calibration_field, random_field, random_vector};

/// Relative slack tolerated by the quadrature evaluation of the bracket.
pub const BRACKET_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaId {
    Monotonicity,
    DifferenceBound,
    DissipationBracket,
    GradL6,
    PowerMeanFact,
}

impl LemmaId {
    pub const ALL: [LemmaId; 5] = [
        LemmaId::Monotonicity,
        LemmaId::DifferenceBound,
        LemmaId::DissipationBracket,
        LemmaId::GradL6,
        LemmaId::PowerMeanFact,
    ];

    /// Whether `worst_ratio` must stay above (true) or below the bound.
    pub fn bound_is_lower(self) -> bool {
        matches!(self, LemmaId::Monotonicity | LemmaId::DissipationBracket)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LemmaId::Monotonicity => "monotonicity",
            LemmaId::DifferenceBound => "difference_bound",
            LemmaId::DissipationBracket => "dissipation_bracket",
            LemmaId::GradL6 => "grad_l6",
            LemmaId::PowerMeanFact => "power_mean_fact",
        }
    }
}

/// Outcome of sampling one inequality.
///
/// Ratios are normalized so the certified bound is 1 for the pointwise
/// lemmas: lhs / (c(r)|w|^{r+1}) for monotonicity, lhs / rhs for the
/// difference bound and value / 2^{s-1} for the power-mean fact. The bracket
/// reports its smallest relative slack and the gradient check its largest
/// ratio against the calibrated constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lemma_id: LemmaId,
    pub samples: u64,
    pub worst_ratio: f64,
    pub certified_bound: Option<f64>,
    pub pass: bool,
}

impl InequalityReport {
    pub fn new(lemma_id: LemmaId, samples: u64, worst_ratio: f64, certified_bound: Option<f64>) -> Self {
        let pass = match certified_bound {
            Some(b) if lemma_id.bound_is_lower() => worst_ratio >= b,
            Some(b) => worst_ratio <= b,
            None => worst_ratio.is_finite(),
        };
        Self {
            lemma_id,
            samples,
            worst_ratio,
            certified_bound,
            pass,
        }
    }

    /// Combines reports for the same lemma (e.g. across exponents).
    pub fn merge(reports: &[InequalityReport]) -> Option<InequalityReport> {
        let first = reports.first()?;
        let lower = first.lemma_id.bound_is_lower();
        let worst = reports
            .iter()
            .map(|r| r.worst_ratio)
            .fold(if lower { f64::INFINITY } else { f64::NEG_INFINITY }, |a, b| {
                if lower {
                    a.min(b)
                } else {
                    a.max(b)
                }
            });
        let samples = reports.iter().map(|r| r.samples).sum();
        let mut merged = InequalityReport::new(first.lemma_id, samples, worst, first.certified_bound);
        merged.pass = merged.pass && reports.iter().all(|r| r.pass);
        Some(merged)
    }
}

/// One report per exponent, tagged with that exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub r: f64,
    pub report: InequalityReport,
}

/// Random pair of vectors: half independent with magnitudes spread over six
/// decades, half near-coincident with relative separation in [1e-4, 1].
pub fn sample_pair<R: Rng + ?Sized>(rng: &mut R) -> (Vec3, Vec3) {
    let u = random_vector(rng, 1e-3, 1e3);
    if rng.random::<bool>() {
        (u, random_vector(rng, 1e-3, 1e3))
    } else {
        let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        let d = random_vector(rng, 1e-4 * nu, nu);
        (u, [u[0] + d[0], u[1] + d[1], u[2] + d[2]])
    }
}

fn chunked_extreme<F>(samples: u64, seed: u64, lower: bool, f: F) -> f64
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    const CHUNK: u64 = 4096;
    let chunks = samples.div_ceil(CHUNK);
    let init = if lower { f64::INFINITY } else { f64::NEG_INFINITY };
    let pick = move |a: f64, b: f64| {
        if a.is_nan() || b.is_nan() {
            f64::NAN
        } else if lower {
            a.min(b)
        } else {
            a.max(b)
        }
    };
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = CHUNK.min(samples - c * CHUNK);
            (0..count).fold(init, |acc, _| pick(acc, f(&mut rng)))
        })
        .collect();
    partial.into_iter().fold(init, pick)
}

pub fn check_monotonicity(r: f64, samples: u64, seed: u64) -> InequalityReport {
    let worst = chunked_extreme(samples, seed, true, |rng| {
        let (u, v) = sample_pair(rng);
        let (lhs, cert) = monotonicity_gap(u, v, r);
        if cert == 0.0 {
            f64::INFINITY
        } else {
            lhs / cert
        }
    });
    InequalityReport::new(LemmaId::Monotonicity, samples, worst, Some(1.0))
}

pub fn check_difference_bound(r: f64, samples: u64, seed: u64) -> InequalityReport {
    let worst = chunked_extreme(samples, seed, false, |rng| {
        let (u, v) = sample_pair(rng);
        let (lhs, rhs) = difference_bound_check(u, v, r);
        if rhs == 0.0 {
            0.0
        } else {
            lhs / rhs
        }
    });
    InequalityReport::new(LemmaId::DifferenceBound, samples, worst, Some(1.0))
}

/// Samples x on [0, 1e3] (half uniform, half log-uniform down to 1e-6) for
/// the exponent s.
pub fn check_power_mean(s: f64, samples: u64, seed: u64) -> InequalityReport {
    let worst = chunked_extreme(samples, seed, false, |rng| {
        let x = if rng.random::<bool>() {
            rng.random::<f64>() * 1e3
        } else {
            (1e-6f64.ln() + rng.random::<f64>() * (1e3f64.ln() - 1e-6f64.ln())).exp()
        };
        let (value, bound) = power_mean_fact(x, s);
        value / bound
    });
    InequalityReport::new(LemmaId::PowerMeanFact, samples, worst, Some(1.0))
}

/// Bracket over random smooth divergence-free fields on an `n`-grid.
pub fn check_dissipation_bracket(n: usize, r: f64, fields: u64, seed: u64) -> Result<InequalityReport> {
    let grid = Grid::new(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..fields {
        let kmax = rng.random_range(1..=(n / 4).max(1));
        let slope = rng.random_range(1.0..3.0);
        let u = random_field(grid, &mut rng, kmax, slope, true);
        worst = worst.min(dissipation_bracket(&u, r)?.relative_slack());
    }
    Ok(InequalityReport::new(
        LemmaId::DissipationBracket,
        fields,
        worst,
        Some(-BRACKET_TOLERANCE),
    ))
}

/// Largest grad-L6 ratio over the calibration family on an `n`-grid.
pub fn check_grad_l6(n: usize, fields: u64, seed: u64) -> Result<InequalityReport> {
    let grid = Grid::new(n)?;
    let mut worst: f64 = 0.0;
    for i in 0..fields {
        let u = calibration_field(grid, seed, i);
        worst = worst.max(grad_l6_ratio(&u)?);
    }
    Ok(InequalityReport::new(
        LemmaId::GradL6,
        fields,
        worst,
        Some(GRAD_L6_CONSTANT),
    ))
}

/// Sample counts for [`run_inequality_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSettings {
    pub exponents: Vec<f64>,
    pub pair_samples: u64,
    pub field_samples: u64,
    pub bracket_n: usize,
    pub grad_l6_sizes: Vec<usize>,
    pub seed: u64,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        Self {
            exponents: vec![1.0, 1.5, 2.0, 3.0],
            pair_samples: 100_000,
            field_samples: 100,
            bracket_n: 16,
            grad_l6_sizes: vec![8, 16],
            seed: 2019,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteOutcome {
    /// One merged report per lemma, in [`LemmaId::ALL`] order.
    pub reports: Vec<InequalityReport>,
    /// Per-exponent breakdown of the exponent-dependent checks.
    pub by_exponent: Vec<ExponentReport>,
}

impl SuiteOutcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Runs all five checks. The power-mean fact is sampled at s = r - 1, the
/// exponent at which the difference bound uses it.
pub fn run_inequality_suite(settings: &SuiteSettings) -> Result<SuiteOutcome> {
    let mut by_exponent = Vec::new();
    let mut per_lemma: Vec<Vec<InequalityReport>> = vec![Vec::new(); 5];
    for (j, &r) in settings.exponents.iter().enumerate() {
        let seed = settings.seed.wrapping_add(1000 * j as u64);
        let reps = [
            check_monotonicity(r, settings.pair_samples, seed),
            check_difference_bound(r, settings.pair_samples, seed + 1),
            check_dissipation_bracket(settings.bracket_n, r, settings.field_samples, seed + 2)?,
            check_power_mean(r - 1.0, settings.pair_samples, seed + 3),
        ];
        for rep in reps {
            let slot = LemmaId::ALL.iter().position(|&l| l == rep.lemma_id).unwrap();
            per_lemma[slot].push(rep.clone());
            by_exponent.push(ExponentReport { r, report: rep });
        }
    }
    let slot = LemmaId::ALL.iter().position(|&l| l == LemmaId::GradL6).unwrap();
    for &n in &settings.grad_l6_sizes {
        per_lemma[slot].push(check_grad_l6(n, settings.field_samples, settings.seed + 7)?);
    }
    let reports = per_lemma
        .iter()
        .filter_map(|reps| InequalityReport::merge(reps))
        .collect();
    Ok(SuiteOutcome {
        reports,
        by_exponent,
    })
}
