//! Floating-point reductions with a reproducible summation order.
//!
//! In deterministic mode (the default) sums are split into fixed-size blocks
//! whose partial sums are added in index order, so results are bit-identical
//! for any thread count. Otherwise rayon's adaptive reduction is used.

use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;

const BLOCK: usize = 4096;

static DETERMINISTIC: AtomicBool = AtomicBool::new(true);

pub fn set_deterministic(on: bool) {
    DETERMINISTIC.store(on, Ordering::Relaxed);
}

pub fn is_deterministic() -> bool {
    DETERMINISTIC.load(Ordering::Relaxed)
}

/// Sum of `f(i)` for `i` in `0..len`.
pub fn sum<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    if is_deterministic() {
        let blocks = len.div_ceil(BLOCK);
        let partial: Vec<f64> = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let end = ((b + 1) * BLOCK).min(len);
                (b * BLOCK..end).map(&f).sum::<f64>()
            })
            .collect();
        partial.into_iter().sum()
    } else {
        (0..len).into_par_iter().map(&f).sum()
    }
}
