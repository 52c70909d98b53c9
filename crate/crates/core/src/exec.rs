//! Index-parallel evaluation with a sequential fallback.
//!
//! Every helper here evaluates `f(i)` independently and collects results in
//! index order, so output never depends on how work is partitioned. With the
//! `parallel` feature disabled the same closures run on the calling thread.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f` on `0..n` and returns the results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Fills `out[i] = f(i)` for every row of a row-major buffer with `width` columns.
#[cfg(feature = "parallel")]
pub fn fill_rows<F>(out: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    out.par_chunks_mut(width)
        .enumerate()
        .for_each(|(row, chunk)| f(row, chunk));
}

#[cfg(not(feature = "parallel"))]
pub fn fill_rows<F>(out: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    out.chunks_mut(width).enumerate().for_each(|(row, chunk)| f(row, chunk));
}

/// True when the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
