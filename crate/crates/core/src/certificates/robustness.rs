use serde::{Deserialize, Serialize};

use crate::error::{CbfError, Result};
use crate::fields::{norm_hs, SpectralField};
use crate::integrator::{trapezoid, DiagnosticsRow, DiagnosticsSeries};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsMode {
    Unit,
    /// Fitted along a library of runs; holds an identifier of that library.
    Calibrated(String),
}

/// Constants of the robustness condition.
///
/// R(u) = c_R exp(-c2 T) / sqrt(T) exp(-c1 int gamma), where the proof-level
/// constants give c_R = 1 / sqrt(2 (c3 + c_r)) and c2 = c_r + c1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateConstants {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c_r: f64,
    #[serde(rename = "c_R")]
    pub c_big_r: f64,
    pub mode: ConstantsMode,
}

impl CertificateConstants {
    pub fn unit() -> Self {
        Self {
            c0: 1.0,
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            c_r: 1.0,
            c_big_r: 1.0,
            mode: ConstantsMode::Unit,
        }
    }

    /// Proof-level mapping from (c0, c1, c3, c_r) to the full set.
    pub fn from_proof(c0: f64, c1: f64, c3: f64, c_r: f64, source: impl Into<String>) -> Self {
        Self {
            c0,
            c1,
            c2: c_r + c1,
            c3,
            c_r,
            c_big_r: 1.0 / (2.0 * (c3 + c_r)).sqrt(),
            mode: ConstantsMode::Calibrated(source.into()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.c0, self.c1, self.c2, self.c3, self.c_r, self.c_big_r];
        if all.iter().all(|c| *c > 0.0 && c.is_finite()) {
            Ok(())
        } else {
            Err(CbfError::InvalidArgument(format!(
                "certificate constants must be positive: {all:?}"
            )))
        }
    }
}

/// |u|_{H^1}^4 + |grad u| |A u| + |u|_{H^1}^{2(r-1)} + |grad u|, with the
/// middle power read as 1 at r = 1.
pub fn robustness_integrand(row: &DiagnosticsRow, r: f64) -> f64 {
    let power = if r == 1.0 { 1.0 } else { row.h1.powf(2.0 * (r - 1.0)) };
    row.h1.powi(4) + row.grad_l2 * row.stokes_l2 + power + row.grad_l2
}

/// Rows with t in [t0, t0 + T], where t0 is the first recorded time.
fn window(diag: &DiagnosticsSeries, t: f64) -> Result<Vec<&DiagnosticsRow>> {
    let t0 = diag
        .first_t()
        .ok_or_else(|| CbfError::Coverage("no diagnostics recorded".into()))?;
    diag.ensure_covers(t0, t0 + t)?;
    let tol = 1e-9 * (t0 + t).abs().max(1.0);
    Ok(diag.rows.iter().filter(|r| r.t <= t0 + t + tol).collect())
}

/// R(u) over [t0, t0 + T] with trapezoidal time quadrature.
pub fn robustness_r(
    diag: &DiagnosticsSeries,
    t: f64,
    r: f64,
    k: &CertificateConstants,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(CbfError::InvalidArgument(format!("T must be positive, got {t}")));
    }
    k.validate()?;
    let rows = window(diag, t)?;
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let vals: Vec<f64> = rows.iter().map(|row| robustness_integrand(row, r)).collect();
    let integral = trapezoid(&times, &vals);
    Ok(k.c_big_r * (-k.c2 * t).exp() / t.sqrt() * (-k.c1 * integral).exp())
}

/// |u0 - v0|_{H^1}^2 + c0 int |f - g|^2 dt, trapezoidal over `times`.
pub fn robustness_lhs(
    u0: &SpectralField,
    v0: &SpectralField,
    times: &[f64],
    f_minus_g_l2: &[f64],
    k: &CertificateConstants,
) -> Result<f64> {
    u0.ensure_same_grid(v0)?;
    if times.len() != f_minus_g_l2.len() {
        return Err(CbfError::InvalidArgument(
            "forcing difference series and times differ in length".into(),
        ));
    }
    let sq: Vec<f64> = f_minus_g_l2.iter().map(|x| x * x).collect();
    Ok(norm_hs(&u0.sub(v0), 1.0).powi(2) + k.c0 * trapezoid(times, &sq))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    NotCertified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub r_of_u: f64,
    pub lhs: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub constants: CertificateConstants,
    #[serde(rename = "T")]
    pub horizon: f64,
}

impl CertificateReport {
    pub fn new(r_of_u: f64, lhs: f64, constants: CertificateConstants, horizon: f64) -> Self {
        let margin = r_of_u - lhs;
        Self {
            r_of_u,
            lhs,
            margin,
            verdict: if margin > 0.0 {
                Verdict::Certified
            } else {
                Verdict::NotCertified
            },
            constants,
            horizon,
        }
    }

    pub fn certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }
}
