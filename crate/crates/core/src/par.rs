//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) work is spread with rayon;
//! without it every helper runs on the calling thread. Results are always
//! gathered into index order, so output never depends on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Runs `op` with `jobs` worker threads (`0` = rayon's default).
/// Without the `parallel` feature `jobs` is ignored.
#[cfg(feature = "parallel")]
pub fn run_with_jobs<R, F>(jobs: usize, op: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(op),
        Err(_) => op(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn run_with_jobs<R, F>(_jobs: usize, op: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    op()
}

/// `[f(0), f(1), …, f(n−1)]`, evaluated in parallel when enabled.
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
    map_indexed_seq(n, f)
}

/// Sequential reference version of [`map_indexed`].
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Whether the crate was built with rayon support.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
