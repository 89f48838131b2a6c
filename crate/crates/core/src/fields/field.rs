use num_complex::Complex64;
use rayon::prelude::*;

use super::fft;
use super::grid::{Grid, DOMAIN_VOLUME};
use super::reduce;
use crate::error::{CbfError, Result};

/// A real 3-vector field stored as Fourier coefficients u_k on the grid lattice.
///
/// Convention: u(x) = sum_k u_k e^{i k.x}, u_k = |T^3|^{-1} int u e^{-i k.x} dx.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    pub coeffs: [Vec<Complex64>; 3],
}

/// Collocation samples of a real 3-vector field at x_j = 2 pi j / n.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    pub samples: [Vec<f64>; 3],
}

/// Spectral velocity gradient, `comps[m][l]` = d_m u_l.
#[derive(Debug, Clone)]
pub struct GradientField {
    grid: Grid,
    pub comps: [[Vec<Complex64>; 3]; 3],
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        let z = vec![Complex64::default(); grid.len()];
        Self {
            grid,
            coeffs: [z.clone(), z.clone(), z],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: [Vec<Complex64>; 3]) -> Result<Self> {
        if coeffs.iter().any(|c| c.len() != grid.len()) {
            return Err(CbfError::InvalidArgument(format!(
                "expected {} coefficients per component",
                grid.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn get(&self, k: [i64; 3]) -> [Complex64; 3] {
        match self.grid.index_of(k) {
            Some(i) => [self.coeffs[0][i], self.coeffs[1][i], self.coeffs[2][i]],
            None => [Complex64::default(); 3],
        }
    }

    /// Sets the coefficient at `k`. Does not touch the partner mode.
    pub fn set(&mut self, k: [i64; 3], value: [Complex64; 3]) -> Result<()> {
        let idx = self.grid.index_of(k).ok_or_else(|| {
            CbfError::InvalidArgument(format!("wavevector {k:?} outside the lattice"))
        })?;
        for c in 0..3 {
            self.coeffs[c][idx] = value[c];
        }
        Ok(())
    }

    /// Sets `k` to `value` and `-k` to its conjugate, keeping the field real.
    pub fn set_real_mode(&mut self, k: [i64; 3], value: [Complex64; 3]) -> Result<()> {
        self.set(k, value)?;
        let idx = self.grid.index_of(k).unwrap();
        let p = self.grid.partner(idx);
        for c in 0..3 {
            self.coeffs[c][p] = value[c].conj();
        }
        if p == idx {
            for c in 0..3 {
                self.coeffs[c][idx].im = 0.0;
            }
        }
        Ok(())
    }

    pub fn ensure_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(CbfError::GridMismatch {
                left: self.grid.n(),
                right: other.grid.n(),
            });
        }
        Ok(())
    }

    /// Largest |u_k - conj(u_{-k})| over all modes.
    pub fn hermitian_defect(&self) -> f64 {
        let g = self.grid;
        self.coeffs
            .iter()
            .map(|c| {
                (0..g.len())
                    .into_par_iter()
                    .map(|i| (c[i] - c[g.partner(i)].conj()).norm())
                    .reduce(|| 0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Replaces the field by its Hermitian part, (u_k + conj(u_{-k}))/2.
    pub fn symmetrize(&mut self) {
        let g = self.grid;
        for c in self.coeffs.iter_mut() {
            let src = c.clone();
            c.par_iter_mut()
                .enumerate()
                .for_each(|(i, v)| *v = (src[i] + src[g.partner(i)].conj()) * 0.5);
        }
    }

    pub fn map_modes<F>(&self, f: F) -> SpectralField
    where
        F: Fn(usize, [Complex64; 3]) -> [Complex64; 3] + Sync,
    {
        let g = self.grid;
        let triples: Vec<[Complex64; 3]> = (0..g.len())
            .into_par_iter()
            .map(|i| f(i, [self.coeffs[0][i], self.coeffs[1][i], self.coeffs[2][i]]))
            .collect();
        let mut out = SpectralField::zeros(g);
        for (i, t) in triples.into_iter().enumerate() {
            out.coeffs[0][i] = t[0];
            out.coeffs[1][i] = t[1];
            out.coeffs[2][i] = t[2];
        }
        out
    }

    /// Multiplies every mode by a real scalar symbol.
    pub fn scale_modes<F>(&self, f: F) -> SpectralField
    where
        F: Fn(usize) -> f64 + Sync,
    {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            c.par_iter_mut().enumerate().for_each(|(i, v)| *v *= f(i));
        }
        out
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        self.scale_modes(|_| a)
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy_in_place(a, other);
        out
    }

    pub fn axpy_in_place(&mut self, a: f64, other: &SpectralField) {
        assert_eq!(self.grid, other.grid);
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            x.par_iter_mut().zip(y.par_iter()).for_each(|(x, y)| *x += y * a);
        }
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        self.axpy(-1.0, other)
    }

    /// L^2(T^3) inner product, |T^3| sum_k u_k . conj(v_k). Real for real fields.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        assert_eq!(self.grid, other.grid);
        let s: f64 = (0..3)
            .map(|c| {
                let a = &self.coeffs[c];
                let b = &other.coeffs[c];
                reduce::sum(a.len(), |i| (a[i] * b[i].conj()).re)
            })
            .sum();
        DOMAIN_VOLUME * s
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.par_iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Zeroes every mode where `keep` is false.
    pub fn masked<F>(&self, keep: F) -> SpectralField
    where
        F: Fn(usize) -> bool + Sync,
    {
        self.scale_modes(|i| if keep(i) { 1.0 } else { 0.0 })
    }

    /// 2/3-rule truncation: keep max_j |k_j| <= (n-1)/3.
    pub fn dealiased(&self) -> SpectralField {
        let g = self.grid;
        let cut = g.dealias_cutoff();
        self.masked(|i| g.k(i).iter().all(|kj| kj.abs() <= cut))
    }

    /// Trigonometric interpolation onto a finer grid. Nyquist coefficients are
    /// split evenly between +n/2 and -n/2 so the interpolant stays real.
    pub fn padded(&self, target: Grid) -> SpectralField {
        let g = self.grid;
        assert!(target.n() >= g.n(), "padding must not shrink the grid");
        if target == g {
            return self.clone();
        }
        let map = axis_map(g, target);
        let mut out = SpectralField::zeros(target);
        for (a, ma) in map.iter().enumerate() {
            for (b, mb) in map.iter().enumerate() {
                for (c, mc) in map.iter().enumerate() {
                    let idx = g.index(a, b, c);
                    for &(ta, wa) in ma {
                        for &(tb, wb) in mb {
                            let w = wa * wb;
                            for &(tc, wc) in mc {
                                let t = target.index(ta, tb, tc);
                                for comp in 0..3 {
                                    out.coeffs[comp][t] += self.coeffs[comp][idx] * (w * wc);
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Restriction to a coarser lattice. Coefficients at +/- n/2 of the fine
    /// grid fold onto the coarse Nyquist slot, the inverse of [`Self::padded`].
    pub fn restricted(&self, target: Grid) -> SpectralField {
        let g = self.grid;
        assert!(target.n() <= g.n(), "restriction must not grow the grid");
        if target == g {
            return self.clone();
        }
        let map = axis_map(target, g);
        let mut out = SpectralField::zeros(target);
        for (a, ma) in map.iter().enumerate() {
            for (b, mb) in map.iter().enumerate() {
                for (c, mc) in map.iter().enumerate() {
                    let idx = target.index(a, b, c);
                    for &(sa, _) in ma {
                        for &(sb, _) in mb {
                            for &(sc, _) in mc {
                                let s = g.index(sa, sb, sc);
                                for comp in 0..3 {
                                    out.coeffs[comp][idx] += self.coeffs[comp][s];
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Largest |k . u_k| over modes, using the derivative wavevector.
    pub fn divergence_defect(&self) -> f64 {
        let g = self.grid;
        (0..g.len())
            .into_par_iter()
            .map(|i| {
                let k = g.derivative_k(i);
                (self.coeffs[0][i] * k[0] + self.coeffs[1][i] * k[1] + self.coeffs[2][i] * k[2])
                    .norm()
            })
            .reduce(|| 0.0, f64::max)
    }
}

impl PhysicalField {
    pub fn zeros(grid: Grid) -> Self {
        let z = vec![0.0; grid.len()];
        Self {
            grid,
            samples: [z.clone(), z.clone(), z],
        }
    }

    pub fn from_samples(grid: Grid, samples: [Vec<f64>; 3]) -> Result<Self> {
        if samples.iter().any(|s| s.len() != grid.len()) {
            return Err(CbfError::InvalidArgument(format!(
                "expected {} samples per component",
                grid.len()
            )));
        }
        Ok(Self { grid, samples })
    }

    /// Samples `f(x)` at every collocation point.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn([f64; 3]) -> [f64; 3] + Sync,
    {
        let vals: Vec<[f64; 3]> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let [a, b, c] = grid.split(idx);
                f([grid.coordinate(a), grid.coordinate(b), grid.coordinate(c)])
            })
            .collect();
        let mut out = Self::zeros(grid);
        for (i, v) in vals.into_iter().enumerate() {
            for c in 0..3 {
                out.samples[c][i] = v[c];
            }
        }
        out
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Euclidean magnitude at every point.
    pub fn magnitude(&self) -> Vec<f64> {
        let [a, b, c] = &self.samples;
        (0..self.grid.len())
            .into_par_iter()
            .map(|i| (a[i] * a[i] + b[i] * b[i] + c[i] * c[i]).sqrt())
            .collect()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitude().into_iter().fold(0.0, f64::max)
    }
}

impl GradientField {
    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// L^2 norm of the tensor, (|T^3| sum |k|^2 |u_k|^2)^{1/2} away from Nyquist.
    pub fn norm_l2(&self) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .flat_map(|row| row.iter())
            .map(|c| reduce::sum(c.len(), |i| c[i].norm_sqr()))
            .sum();
        (DOMAIN_VOLUME * s).sqrt()
    }

    /// Physical samples of all nine entries, `out[m][l]` = d_m u_l.
    pub fn to_physical(&self) -> [[Vec<f64>; 3]; 3] {
        let refs: Vec<&[Complex64]> = self
            .comps
            .iter()
            .flat_map(|row| row.iter().map(Vec::as_slice))
            .collect();
        let mut flat = fft::inverse_real(self.grid, &refs).into_iter();
        std::array::from_fn(|_| std::array::from_fn(|_| flat.next().unwrap()))
    }
}

/// Inverse transform to collocation samples.
pub fn to_physical(u: &SpectralField) -> PhysicalField {
    let s = fft::inverse_real(u.grid, &[&u.coeffs[0], &u.coeffs[1], &u.coeffs[2]]);
    let mut it = s.into_iter();
    PhysicalField {
        grid: u.grid,
        samples: std::array::from_fn(|_| it.next().unwrap()),
    }
}

/// Forward transform, u_k = n^{-3} sum_j u(x_j) e^{-i k.x_j}.
pub fn to_spectral(p: &PhysicalField) -> SpectralField {
    let s = fft::forward_real(p.grid, &[&p.samples[0], &p.samples[1], &p.samples[2]]);
    let mut it = s.into_iter();
    SpectralField {
        grid: p.grid,
        coeffs: std::array::from_fn(|_| it.next().unwrap()),
    }
}

/// Spectral gradient, entries i k_m (u_k)_l. The derivative along an axis is
/// zero on that axis's Nyquist plane.
pub fn gradient(u: &SpectralField) -> GradientField {
    let g = u.grid;
    let comps = std::array::from_fn(|m| {
        std::array::from_fn(|l| {
            let src = &u.coeffs[l];
            (0..g.len())
                .into_par_iter()
                .map(|i| src[i] * Complex64::new(0.0, g.derivative_k(i)[m]))
                .collect()
        })
    });
    GradientField { grid: g, comps }
}

/// Keeps modes with max_j |k_j| <= m.
pub fn truncate_cube(u: &SpectralField, m: usize) -> SpectralField {
    let g = u.grid;
    let m = m as i64;
    u.masked(|i| g.k(i).iter().all(|kj| kj.abs() <= m))
}

/// Keeps modes with |k| <= m.
pub fn truncate_ball(u: &SpectralField, m: usize) -> SpectralField {
    let g = u.grid;
    let m2 = (m * m) as f64;
    u.masked(|i| g.k_squared(i) <= m2)
}

/// For each axis slot of `coarse`, the slots of `fine` holding the same
/// wavenumber, with padding weights. The coarse Nyquist slot maps to both
/// +n/2 and -n/2 with weight 1/2.
fn axis_map(coarse: Grid, fine: Grid) -> Vec<Vec<(usize, f64)>> {
    let ny = coarse.nyquist();
    (0..coarse.n())
        .map(|i| {
            let k = coarse.wavenumber(i);
            if k == -ny {
                vec![
                    (fine.slot(k).unwrap(), 0.5),
                    (fine.slot(-k).unwrap(), 0.5),
                ]
            } else {
                vec![(fine.slot(k).unwrap(), 1.0)]
            }
        })
        .collect()
}
