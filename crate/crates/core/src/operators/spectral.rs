use rayon::prelude::*;

use crate::error::{CbfError, Result};
use crate::fields::{fft, gradient, to_physical, SpectralField};

/// Leray projection, u_k - k (k . u_k)/|k|^2 per mode.
///
/// The mean mode is left unchanged. Nyquist components of k are treated as
/// zero, matching the differentiation wavevector, so real fields stay real.
pub fn leray_project(u: &SpectralField) -> SpectralField {
    let g = u.grid();
    u.map_modes(|i, c| {
        let k = g.derivative_k(i);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            return c;
        }
        let dot = (c[0] * k[0] + c[1] * k[1] + c[2] * k[2]) / k2;
        [c[0] - dot * k[0], c[1] - dot * k[1], c[2] - dot * k[2]]
    })
}

/// Stokes operator A = -P Delta, |k|^2 times the projected mode.
pub fn stokes(u: &SpectralField) -> SpectralField {
    let g = u.grid();
    leray_project(u).scale_modes(|i| g.k_squared(i))
}

/// B(u, v) = P (u . grad) v, evaluated pseudospectrally and dealiased by the
/// 2/3 rule.
pub fn convective(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    convective_with(u, v, true)
}

/// [`convective`] with the 2/3 truncation of the product optional.
pub fn convective_with(u: &SpectralField, v: &SpectralField, dealias: bool) -> Result<SpectralField> {
    u.ensure_same_grid(v)?;
    let g = u.grid();
    let up = to_physical(u);
    let dv = gradient(v).to_physical();
    let products: Vec<Vec<f64>> = (0..3)
        .map(|l| {
            (0..g.len())
                .into_par_iter()
                .map(|i| {
                    up.samples[0][i] * dv[0][l][i]
                        + up.samples[1][i] * dv[1][l][i]
                        + up.samples[2][i] * dv[2][l][i]
                })
                .collect()
        })
        .collect();
    let spec = fft::forward_real(g, &[&products[0], &products[1], &products[2]]);
    let mut it = spec.into_iter();
    let raw = SpectralField::from_coeffs(g, std::array::from_fn(|_| it.next().unwrap()))?;
    let raw = if dealias { raw.dealiased() } else { raw };
    Ok(leray_project(&raw))
}

fn check_exponent(r: f64) -> Result<()> {
    if !(r >= 1.0) {
        return Err(CbfError::InvalidArgument(format!(
            "absorption exponent must be >= 1, got {r}"
        )));
    }
    Ok(())
}

/// |w|^{r-1} as a function of |w|^2, with the value 1 at r = 1.
#[inline]
pub(crate) fn weight_from_sq(mag_sq: f64, r: f64) -> f64 {
    if r == 1.0 {
        1.0
    } else if mag_sq == 0.0 {
        0.0
    } else {
        mag_sq.powf(0.5 * (r - 1.0))
    }
}

/// C_r(u, v) = P(|u|^{r-1} v).
///
/// The pointwise product is formed on a grid twice as fine, transformed back,
/// restricted to the original lattice and projected. For r = 1 this is P v.
pub fn absorption(u: &SpectralField, v: &SpectralField, r: f64) -> Result<SpectralField> {
    u.ensure_same_grid(v)?;
    check_exponent(r)?;
    if r == 1.0 {
        return Ok(leray_project(v));
    }
    let g = u.grid();
    let big = g.doubled();
    let up = to_physical(&u.padded(big));
    let vp = if std::ptr::eq(u, v) {
        None
    } else {
        Some(to_physical(&v.padded(big)))
    };
    let vs = vp.as_ref().unwrap_or(&up);
    let weight: Vec<f64> = (0..big.len())
        .into_par_iter()
        .map(|i| {
            let m2 = up.samples[0][i].powi(2) + up.samples[1][i].powi(2) + up.samples[2][i].powi(2);
            weight_from_sq(m2, r)
        })
        .collect();
    let products: Vec<Vec<f64>> = (0..3)
        .map(|c| {
            vs.samples[c]
                .par_iter()
                .zip(weight.par_iter())
                .map(|(a, w)| a * w)
                .collect()
        })
        .collect();
    let spec = fft::forward_real(big, &[&products[0], &products[1], &products[2]]);
    let mut it = spec.into_iter();
    let fine = SpectralField::from_coeffs(big, std::array::from_fn(|_| it.next().unwrap()))?;
    Ok(leray_project(&fine.restricted(g)))
}

/// C_r(u) = C_r(u, u).
pub fn absorption_self(u: &SpectralField, r: f64) -> Result<SpectralField> {
    absorption(u, u, r)
}

/// Spectral energy fraction in the top third of the wavenumber range,
/// max_j |k_j| > (n-1)/3.
pub fn tail_fraction(u: &SpectralField) -> f64 {
    let g = u.grid();
    let cut = g.dealias_cutoff();
    let (mut tail, mut total) = (0.0, 0.0);
    for i in 0..g.len() {
        let e: f64 = (0..3).map(|c| u.coeffs[c][i].norm_sqr()).sum();
        total += e;
        if g.k(i).iter().any(|kj| kj.abs() > cut) {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}
