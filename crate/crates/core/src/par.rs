//! Row-wise data parallelism with a sequential fallback.
//!
//! Every helper here hands each row to the closure exactly once and never
//! reduces across rows, so results are bit-identical whatever the worker
//! count. Cross-row reductions are done by callers in a fixed order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Apply `f(row_index, row)` to every `width`-sized row of `data`.
pub(crate) fn for_each_row<T, F>(data: &mut [T], width: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(width).enumerate().for_each(|(i, row)| f(i, row));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(width).enumerate().for_each(|(i, row)| f(i, row));
}

/// Like [`for_each_row`] but with per-worker scratch state built by `init`.
pub(crate) fn for_each_row_with<T, S, I, F>(data: &mut [T], width: usize, init: I, f: F)
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(width)
        .enumerate()
        .for_each_init(&init, |s, (i, row)| f(s, i, row));
    #[cfg(not(feature = "parallel"))]
    {
        let mut s = init();
        data.chunks_mut(width)
            .enumerate()
            .for_each(|(i, row)| f(&mut s, i, row));
    }
}

/// Ordered map over `0..len`.
pub(crate) fn map_indices<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Sum in index order; used for every cross-row reduction.
#[inline]
pub(crate) fn ordered_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |acc, v| acc + v)
}
