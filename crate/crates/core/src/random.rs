//! Seeded random fields for initial data, perturbations and test sampling.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::fields::{norm_hs, Grid, SpectralField};
use crate::operators::leray_project;

/// Random real field with |u_k| ~ |k|^{-slope} on max_j |k_j| <= kmax.
///
/// Coefficients are complex Gaussians scaled by the spectrum (the mean mode
/// uses weight 1), then symmetrized; with `divfree` the result is also
/// Leray-projected.
pub fn random_field<R: Rng + ?Sized>(
    grid: Grid,
    rng: &mut R,
    kmax: usize,
    slope: f64,
    divfree: bool,
) -> SpectralField {
    let mut u = SpectralField::zeros(grid);
    let kmax = kmax as i64;
    for idx in 0..grid.len() {
        let k = grid.k(idx);
        let inside = k.iter().all(|kj| kj.abs() <= kmax);
        // Draw for every slot so the stream does not depend on kmax.
        let draws: [(f64, f64); 3] = std::array::from_fn(|_| {
            (rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        if !inside {
            continue;
        }
        let k2 = grid.k_squared(idx);
        let amp = if k2 == 0.0 { 1.0 } else { k2.powf(-0.5 * slope) };
        for c in 0..3 {
            u.coeffs[c][idx] = Complex64::new(draws[c].0, draws[c].1) * amp;
        }
    }
    u.symmetrize();
    if divfree {
        leray_project(&u)
    } else {
        u
    }
}

/// Random divergence-free field with zero mean scaled to the given H^1 norm.
pub fn random_divfree_h1<R: Rng + ?Sized>(
    grid: Grid,
    rng: &mut R,
    kmax: usize,
    slope: f64,
    h1: f64,
) -> SpectralField {
    let mut u = random_field(grid, rng, kmax, slope, true);
    for c in 0..3 {
        u.coeffs[c][0] = Complex64::default();
    }
    let norm = norm_hs(&u, 1.0);
    if norm > 0.0 {
        u.scaled(h1 / norm)
    } else {
        u
    }
}

/// Member `index` of the family used to fit empirical constants: a
/// divergence-free field with kmax drawn from 1..=n/2-1 and slope from [0, 3],
/// seeded by (seed, index).
pub fn calibration_field(grid: Grid, seed: u64, index: u64) -> SpectralField {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let kmax = rng.random_range(1..=(grid.n() / 2 - 1).max(1));
    let slope = rng.random_range(0.0..3.0);
    random_field(grid, &mut rng, kmax, slope, true)
}

/// Uniformly distributed direction times a log-uniform magnitude in [lo, hi].
pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> [f64; 3] {
    let dir: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let norm = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    let mag = (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp();
    if norm == 0.0 {
        return [mag, 0.0, 0.0];
    }
    dir.map(|d| d / norm * mag)
}
