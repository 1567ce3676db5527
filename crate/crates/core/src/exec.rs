//! Data-parallel mapping helpers.
//!
//! The grid-sized loops (joint-spectrum rows, pump-pair diagonals, sweep
//! points) all funnel through [`map_indexed`], which fans out on rayon when
//! the `parallel` feature is enabled and degrades to a plain sequential loop
//! otherwise. Results are collected in index order, so callers see identical
//! output either way; reductions over the collected vector stay sequential to
//! keep outputs bit-reproducible. [`map_indexed_seq`] is always sequential and
//! exists for benchmark comparisons.

/// Map `f` over `0..n`, in parallel when available. Output order matches
/// index order regardless of the execution backend.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
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

/// Sequential reference version of [`map_indexed`].
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
