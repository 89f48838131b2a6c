//! Three-dimensional complex FFTs built from cached one-dimensional plans.
//!
//! Every line transform is independent, so the output does not depend on the
//! number of worker threads. Real fields are transformed two at a time by
//! packing them into the real and imaginary parts of one complex array.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::grid::Grid;

pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();

/// Shared plan for an `n^3` transform.
pub fn plan(n: usize) -> Arc<Fft3> {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Fft3 {
                n,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

impl Fft3 {
    /// Unnormalized forward transform, sum_j x_j e^{-i k x_j}.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Unnormalized inverse transform, sum_k c_k e^{+i k x_j}.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let plane = n * n;
        assert_eq!(data.len(), plane * n, "fft buffer has wrong length");
        let scratch_len = fft.get_inplace_scratch_len();

        // Axis 3 is contiguous.
        data.par_chunks_mut(plane).for_each(|slab| {
            let mut scratch = vec![Complex64::default(); scratch_len];
            fft.process_with_scratch(slab, &mut scratch);
        });

        // Axis 2: transpose each (i2, i3) plane, transform rows, transpose back.
        data.par_chunks_mut(plane).for_each(|slab| {
            let mut scratch = vec![Complex64::default(); scratch_len];
            transpose_square(slab, n);
            fft.process_with_scratch(slab, &mut scratch);
            transpose_square(slab, n);
        });

        // Axis 1: for each i2, gather the (i1, i3) plane transposed so lines
        // run along i1, transform, and transpose back before scattering.
        let mut lines = vec![Complex64::default(); data.len()];
        {
            let src: &[Complex64] = data;
            lines.par_chunks_mut(plane).enumerate().for_each(|(i2, chunk)| {
                for i1 in 0..n {
                    let row = &src[i1 * plane + i2 * n..i1 * plane + (i2 + 1) * n];
                    for (i3, &v) in row.iter().enumerate() {
                        chunk[i3 * n + i1] = v;
                    }
                }
                let mut scratch = vec![Complex64::default(); scratch_len];
                fft.process_with_scratch(chunk, &mut scratch);
                transpose_square(chunk, n);
            });
        }
        let src: &[Complex64] = &lines;
        data.par_chunks_mut(plane)
            .enumerate()
            .for_each(|(i1, slab)| {
                for (i2, row) in slab.chunks_mut(n).enumerate() {
                    row.copy_from_slice(&src[i2 * plane + i1 * n..i2 * plane + (i1 + 1) * n]);
                }
            });
    }
}

fn transpose_square(a: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            a.swap(i * n + j, j * n + i);
        }
    }
}

/// Inverse transforms of Hermitian spectra into real samples.
///
/// Spectra are packed in pairs; a spectrum that is not Hermitian would leak
/// its imaginary part into its partner.
pub fn inverse_real(grid: Grid, spectra: &[&[Complex64]]) -> Vec<Vec<f64>> {
    let fft = plan(grid.n());
    let mut out = Vec::with_capacity(spectra.len());
    for pair in spectra.chunks(2) {
        let mut buf: Vec<Complex64> = match pair {
            [a, b] => a
                .par_iter()
                .zip(b.par_iter())
                .map(|(&x, &y)| x + Complex64::i() * y)
                .collect(),
            [a] => a.to_vec(),
            _ => unreachable!(),
        };
        fft.inverse(&mut buf);
        out.push(buf.par_iter().map(|z| z.re).collect());
        if pair.len() == 2 {
            out.push(buf.par_iter().map(|z| z.im).collect());
        }
    }
    out
}

/// Forward transforms of real samples, normalized by 1/n^3.
pub fn forward_real(grid: Grid, samples: &[&[f64]]) -> Vec<Vec<Complex64>> {
    let fft = plan(grid.n());
    let scale = 1.0 / grid.len() as f64;
    let mut out = Vec::with_capacity(samples.len());
    for pair in samples.chunks(2) {
        let mut buf: Vec<Complex64> = match pair {
            [a, b] => a
                .par_iter()
                .zip(b.par_iter())
                .map(|(&x, &y)| Complex64::new(x, y))
                .collect(),
            [a] => a.par_iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            _ => unreachable!(),
        };
        fft.forward(&mut buf);
        let z: &[Complex64] = &buf;
        if pair.len() == 2 {
            let mut a = vec![Complex64::default(); z.len()];
            let mut b = vec![Complex64::default(); z.len()];
            let half = Complex64::new(0.0, -0.5 * scale);
            for_each_partner(grid, &mut a, &mut b, |idx, pidx, x, y| {
                let zk = z[idx];
                let zm = z[pidx].conj();
                *x = (zk + zm) * (0.5 * scale);
                *y = (zk - zm) * half;
            });
            out.push(a);
            out.push(b);
        } else {
            // Symmetrize so the result is exactly Hermitian, as in the paired path.
            let mut a = vec![Complex64::default(); z.len()];
            let mut unused = Vec::<Complex64>::new();
            for_each_partner(grid, &mut a, &mut unused, |idx, pidx, x, _| {
                *x = (z[idx] + z[pidx].conj()) * (0.5 * scale);
            });
            out.push(a);
        }
    }
    out
}

/// Calls `f(idx, partner(idx), &mut a[idx], &mut b[idx])` for every index,
/// parallel over slabs. `b` may be empty, in which case a dummy is passed.
fn for_each_partner<F>(grid: Grid, a: &mut [Complex64], b: &mut [Complex64], f: F)
where
    F: Fn(usize, usize, &mut Complex64, &mut Complex64) + Sync,
{
    let n = grid.n();
    let plane = n * n;
    let body = |i1: usize, sa: &mut [Complex64], mut sb: Option<&mut [Complex64]>| {
        let p1 = (n - i1) % n;
        let mut dummy = Complex64::default();
        for i2 in 0..n {
            let p2 = (n - i2) % n;
            for i3 in 0..n {
                let p3 = (n - i3) % n;
                let local = i2 * n + i3;
                let y = match sb.as_deref_mut() {
                    Some(s) => &mut s[local],
                    None => &mut dummy,
                };
                f(i1 * plane + local, p1 * plane + p2 * n + p3, &mut sa[local], y);
            }
        }
    };
    if b.is_empty() {
        a.par_chunks_mut(plane)
            .enumerate()
            .for_each(|(i1, sa)| body(i1, sa, None));
    } else {
        a.par_chunks_mut(plane)
            .zip(b.par_chunks_mut(plane))
            .enumerate()
            .for_each(|(i1, (sa, sb))| body(i1, sa, Some(sb)));
    }
}
