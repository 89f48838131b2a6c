use serde::{Deserialize, Serialize};

use super::field::{to_physical, PhysicalField, SpectralField};
use super::grid::DOMAIN_VOLUME;
use super::reduce;
use crate::error::{CbfError, Result};
use crate::operators::leray_project;

/// The Fourier norms of one field. All include the |T^3| = (2 pi)^3 weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub l2: f64,
    pub grad_l2: f64,
    /// Full H^1 norm, h1^2 = l2^2 + grad_l2^2.
    pub h1: f64,
    /// ||A u||, the L^2 norm of the Stokes operator applied to u.
    pub stokes_l2: f64,
}

impl NormRecord {
    pub fn of(u: &SpectralField) -> Self {
        let g = u.grid();
        let p = leray_project(u);
        let (mut l2, mut grad, mut stokes) = (0.0, 0.0, 0.0);
        for c in 0..3 {
            let a = &u.coeffs[c];
            let b = &p.coeffs[c];
            l2 += reduce::sum(g.len(), |i| a[i].norm_sqr());
            grad += reduce::sum(g.len(), |i| g.k_squared(i) * a[i].norm_sqr());
            stokes += reduce::sum(g.len(), |i| {
                let k2 = g.k_squared(i);
                k2 * k2 * b[i].norm_sqr()
            });
        }
        Self {
            l2: (DOMAIN_VOLUME * l2).sqrt(),
            grad_l2: (DOMAIN_VOLUME * grad).sqrt(),
            h1: (DOMAIN_VOLUME * (l2 + grad)).sqrt(),
            stokes_l2: (DOMAIN_VOLUME * stokes).sqrt(),
        }
    }
}

/// (|T^3| sum_k |u_k|^2)^{1/2}.
pub fn norm_l2(u: &SpectralField) -> f64 {
    let s: f64 = u
        .coeffs
        .iter()
        .map(|c| reduce::sum(c.len(), |i| c[i].norm_sqr()))
        .sum();
    (DOMAIN_VOLUME * s).sqrt()
}

/// (|T^3| sum_k (1 + |k|^{2s}) |u_k|^2)^{1/2}.
///
/// Taken literally, so at `s = 0` every mode carries weight 2 and the result is
/// sqrt(2) times the L^2 norm.
pub fn norm_hs(u: &SpectralField, s: f64) -> f64 {
    let g = u.grid();
    let total: f64 = u
        .coeffs
        .iter()
        .map(|c| reduce::sum(c.len(), |i| (1.0 + g.k_squared(i).powf(s)) * c[i].norm_sqr()))
        .sum();
    (DOMAIN_VOLUME * total).sqrt()
}

/// ||grad u||_{L^2} as a lattice sum.
pub fn grad_l2(u: &SpectralField) -> f64 {
    let g = u.grid();
    let s: f64 = u
        .coeffs
        .iter()
        .map(|c| reduce::sum(c.len(), |i| g.k_squared(i) * c[i].norm_sqr()))
        .sum();
    (DOMAIN_VOLUME * s).sqrt()
}

/// Collocation estimate of ||u||_{L^p}, ((2 pi/n)^3 sum_j |u(x_j)|^p)^{1/p}.
pub fn norm_lp(field: &PhysicalField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(CbfError::InvalidArgument(format!(
            "L^p norm needs p >= 1, got {p}"
        )));
    }
    let [a, b, c] = &field.samples;
    let s = reduce::sum(field.grid().len(), |i| {
        (a[i] * a[i] + b[i] * b[i] + c[i] * c[i]).powf(0.5 * p)
    });
    Ok((field.grid().cell_volume() * s).powf(1.0 / p))
}

/// Samples of `u` on the grid used for L^p quadrature: twice as fine when p > 2.
pub fn quadrature_samples(u: &SpectralField, p: f64) -> PhysicalField {
    if p > 2.0 {
        to_physical(&u.padded(u.grid().doubled()))
    } else {
        to_physical(u)
    }
}

/// ||u||_{L^p} from a spectral field, oversampled per [`quadrature_samples`].
pub fn norm_lp_spectral(u: &SpectralField, p: f64) -> Result<f64> {
    norm_lp(&quadrature_samples(u, p), p)
}
