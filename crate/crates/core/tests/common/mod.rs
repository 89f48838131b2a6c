#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;

use cbf_core::fields::{Grid, PhysicalField, SpectralField};
use cbf_core::random::random_field;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn grid(n: usize) -> Grid {
    Grid::new(n).unwrap()
}

pub fn field(n: usize, seed: u64, kmax: usize, divfree: bool) -> SpectralField {
    random_field(grid(n), &mut ChaCha8Rng::seed_from_u64(seed), kmax, 1.0, divfree)
}

pub fn max_coeff_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    (0..3)
        .flat_map(|c| a.coeffs[c].iter().zip(&b.coeffs[c]).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max)
}

/// Direct O(n^6) inverse sum u(x_j) = sum_k u_k e^{i k . x_j}.
pub fn direct_inverse(u: &SpectralField) -> PhysicalField {
    let g = u.grid();
    let n = g.n();
    let mut out = PhysicalField::zeros(g);
    for j in 0..g.len() {
        let x = g.split(j).map(|a| 2.0 * PI * a as f64 / n as f64);
        let mut acc = [Complex64::default(); 3];
        for i in 0..g.len() {
            let k = g.k(i);
            let phase = Complex64::from_polar(1.0, k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]);
            for c in 0..3 {
                acc[c] += u.coeffs[c][i] * phase;
            }
        }
        for c in 0..3 {
            out.samples[c][j] = acc[c].re;
        }
    }
    out
}

/// Direct O(n^6) forward sum u_k = n^{-3} sum_j u(x_j) e^{-i k . x_j}.
pub fn direct_forward(p: &PhysicalField) -> SpectralField {
    let g = p.grid();
    let n = g.n();
    let mut out = SpectralField::zeros(g);
    let norm = 1.0 / g.len() as f64;
    for i in 0..g.len() {
        let k = g.k(i);
        let mut acc = [Complex64::default(); 3];
        for j in 0..g.len() {
            let x = g.split(j).map(|a| 2.0 * PI * a as f64 / n as f64);
            let phase = Complex64::from_polar(1.0, -(k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]));
            for c in 0..3 {
                acc[c] += phase * p.samples[c][j];
            }
        }
        for c in 0..3 {
            out.coeffs[c][i] = acc[c] * norm;
        }
    }
    out
}

/// Sparse coefficient map of a field: wavevector -> 3 components.
pub type Modes = HashMap<[i64; 3], [Complex64; 3]>;

pub fn modes(u: &SpectralField) -> Modes {
    let g = u.grid();
    (0..g.len())
        .filter(|&i| (0..3).any(|c| u.coeffs[c][i] != Complex64::default()))
        .map(|i| (g.k(i), [u.coeffs[0][i], u.coeffs[1][i], u.coeffs[2][i]]))
        .collect()
}

pub fn add_k(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Per-mode Leray projection written out independently of the library.
pub fn project(k: [i64; 3], c: [Complex64; 3]) -> [Complex64; 3] {
    let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
    if k2 == 0.0 {
        return c;
    }
    let dot = (c[0] * k[0] as f64 + c[1] * k[1] as f64 + c[2] * k[2] as f64) / k2;
    std::array::from_fn(|m| c[m] - dot * k[m] as f64)
}

/// B(u, v)_k = P_k sum_{p+q=k} (u_p . i q) v_q restricted to the 2/3 band.
pub fn convolution_convective(u: &SpectralField, v: &SpectralField) -> SpectralField {
    let g = u.grid();
    let cut = g.dealias_cutoff();
    let (mu, mv) = (modes(u), modes(v));
    let mut acc: HashMap<[i64; 3], [Complex64; 3]> = HashMap::new();
    for (p, up) in &mu {
        for (q, vq) in &mv {
            let k = add_k(*p, *q);
            if k.iter().any(|kj| kj.abs() > cut) {
                continue;
            }
            let i = Complex64::i();
            let ugrad = i * (up[0] * q[0] as f64 + up[1] * q[1] as f64 + up[2] * q[2] as f64);
            let e = acc.entry(k).or_default();
            for c in 0..3 {
                e[c] += ugrad * vq[c];
            }
        }
    }
    let mut out = SpectralField::zeros(g);
    for (k, c) in acc {
        out.set(k, project(k, c)).unwrap();
    }
    out
}

/// C_3(u, v)_k = P_k sum_{p+q+s=k} (u_p . u_q) v_s on the lattice.
pub fn convolution_cubic(u: &SpectralField, v: &SpectralField) -> SpectralField {
    let g = u.grid();
    let (mu, mv) = (modes(u), modes(v));
    let mut sq: HashMap<[i64; 3], Complex64> = HashMap::new();
    for (p, up) in &mu {
        for (q, uq) in &mu {
            *sq.entry(add_k(*p, *q)).or_default() += up[0] * uq[0] + up[1] * uq[1] + up[2] * uq[2];
        }
    }
    let mut out = SpectralField::zeros(g);
    let mut acc: HashMap<[i64; 3], [Complex64; 3]> = HashMap::new();
    for (p, s) in &sq {
        for (q, vq) in &mv {
            let k = add_k(*p, *q);
            if g.index_of(k).is_none() || k.iter().any(|kj| *kj == -g.nyquist()) {
                continue;
            }
            let e = acc.entry(k).or_default();
            for c in 0..3 {
                e[c] += s * vq[c];
            }
        }
    }
    for (k, c) in acc {
        out.set(k, project(k, c)).unwrap();
    }
    out
}

/// Result of [`dopri`]: the last time reached, the value there, and whether
/// the value crossed the cap before `t_end`.
#[derive(Debug, Clone, Copy)]
pub struct OdeRun {
    pub t: f64,
    pub y: f64,
    pub capped: bool,
    pub max_y: f64,
}

/// Adaptive Dormand-Prince 5(4) for scalar y' = f(t, y) on [t0, t_end],
/// stopping once y exceeds `cap`.
pub fn dopri<F: Fn(f64, f64) -> f64>(f: F, y0: f64, t0: f64, t_end: f64, cap: f64) -> OdeRun {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0,
    ];
    let (mut t, mut y) = (t0, y0);
    let mut h = (t_end - t0) * 1e-6;
    let mut max_y = y;
    while t < t_end {
        h = h.min(t_end - t);
        let mut k = [0.0; 7];
        for s in 0..7 {
            let ys = y + h * (0..s).map(|j| A[s][j] * k[j]).sum::<f64>();
            k[s] = f(t + C[s] * h, ys);
        }
        let y5 = y + h * (0..7).map(|s| B5[s] * k[s]).sum::<f64>();
        let y4 = y + h * (0..7).map(|s| B4[s] * k[s]).sum::<f64>();
        let tol = 1e-12 + 1e-10 * y.abs().max(y5.abs());
        let err = (y5 - y4).abs();
        if err <= tol || h < 1e-300 {
            t += h;
            y = y5;
            max_y = max_y.max(y);
            if !y.is_finite() || y > cap {
                return OdeRun { t, y, capped: true, max_y };
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    OdeRun { t, y, capped: false, max_y }
}
