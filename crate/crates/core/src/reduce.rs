//! Deterministic reductions.
//!
//! Every sum that feeds a report goes through these helpers. Chunk boundaries
//! are fixed by [`CHUNK`] rather than by the thread count, so the rounding
//! pattern (and therefore every printed digit) is independent of how many
//! workers rayon happens to use.

use rayon::prelude::*;

/// Number of terms reduced sequentially (pairwise) by one worker.
pub const CHUNK: usize = 1 << 14;

const BASE: usize = 16;

/// Pairwise (cascade) summation. Error grows like O(log n · eps).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= BASE {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sums `term(i)` for `i in 0..len` in parallel with a fixed reduction tree.
pub fn par_sum_by<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    if len == 0 {
        return 0.0;
    }
    let chunks = len.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(len);
            let buf: Vec<f64> = (lo..hi).map(&term).collect();
            pairwise_sum(&buf)
        })
        .collect();
    pairwise_sum(&partials)
}

/// Minimum over an ordered slice, first index wins on ties. NaN entries are skipped.
pub fn ordered_argmin(xs: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in xs.iter().enumerate() {
        if x.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if b <= x => {}
            _ => best = Some((i, x)),
        }
    }
    best
}
