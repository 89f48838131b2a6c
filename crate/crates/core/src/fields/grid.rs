use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CbfError, Result};

/// |T^3| for the torus of side 2 pi.
pub const DOMAIN_VOLUME: f64 = 8.0 * PI * PI * PI;

/// A cubic collocation lattice of `n` points per direction on [0, 2 pi)^3.
///
/// Spectral arrays are stored in FFT index order, row-major in (k1, k2, k3):
/// index `i` along an axis corresponds to wavenumber `i` for `i < n/2` and
/// `i - n` otherwise, so the represented set is `-n/2 <= k_j < n/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(CbfError::InvalidArgument(format!(
                "grid size must be even and >= 4, got {n}"
            )));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of lattice points, n^3.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn nyquist(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// Largest |k_j| kept by the 2/3 rule. Chosen so that `n > 3 K`, which makes
    /// quadratic products of fields inside the cube exact on the kept modes.
    #[inline]
    pub fn dealias_cutoff(&self) -> i64 {
        ((self.n - 1) / 3) as i64
    }

    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Inverse of [`Grid::wavenumber`]; `None` when `k` is outside the lattice.
    #[inline]
    pub fn slot(&self, k: i64) -> Option<usize> {
        let half = self.nyquist();
        if k < -half || k >= half {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + self.n as i64) as usize)
        }
    }

    #[inline]
    pub fn index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        (i1 * self.n + i2) * self.n + i3
    }

    #[inline]
    pub fn split(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Lattice wavevector of a flat index.
    #[inline]
    pub fn k(&self, idx: usize) -> [i64; 3] {
        let [a, b, c] = self.split(idx);
        [self.wavenumber(a), self.wavenumber(b), self.wavenumber(c)]
    }

    /// Flat index of the wavevector -k (mod n), the Hermitian partner slot.
    #[inline]
    pub fn partner(&self, idx: usize) -> usize {
        let n = self.n;
        let [a, b, c] = self.split(idx);
        self.index((n - a) % n, (n - b) % n, (n - c) % n)
    }

    /// Flat index of wavevector `k`, if represented.
    pub fn index_of(&self, k: [i64; 3]) -> Option<usize> {
        Some(self.index(self.slot(k[0])?, self.slot(k[1])?, self.slot(k[2])?))
    }

    /// Wavevector used for differentiation: Nyquist components map to zero so
    /// that derivatives of real fields stay real.
    #[inline]
    pub fn derivative_k(&self, idx: usize) -> [f64; 3] {
        let k = self.k(idx);
        let ny = -self.nyquist();
        let f = |kj: i64| if kj == ny { 0.0 } else { kj as f64 };
        [f(k[0]), f(k[1]), f(k[2])]
    }

    #[inline]
    pub fn k_squared(&self, idx: usize) -> f64 {
        let k = self.k(idx);
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64
    }

    /// True when some component of the wavevector sits on the Nyquist plane.
    #[inline]
    pub fn on_nyquist(&self, idx: usize) -> bool {
        let ny = -self.nyquist();
        self.k(idx).iter().any(|&kj| kj == ny)
    }

    /// Collocation coordinate x_j = 2 pi j / n.
    #[inline]
    pub fn coordinate(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n as f64
    }

    /// Quadrature weight (2 pi / n)^3.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        DOMAIN_VOLUME / self.len() as f64
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// The grid with twice the points per direction.
    pub fn doubled(&self) -> Grid {
        Grid { n: 2 * self.n }
    }
}
