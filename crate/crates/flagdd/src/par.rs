//! Data-parallel map helpers with a sequential fallback.
//!
//! Work items are always collected in index order and folded sequentially by
//! the caller, so results are bit-identical for any worker count, including
//! the non-`parallel` build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, preserving index order in the output.
#[cfg(feature = "parallel")]
pub fn map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, preserving index order in the output.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Run `f` inside a pool of `workers` threads (0 = rayon default). The
/// sequential build ignores `workers` and runs `f` directly; outputs do not
/// depend on the worker count either way.
#[cfg(feature = "parallel")]
pub fn with_workers<T: Send, F: FnOnce() -> T + Send>(workers: usize, f: F) -> T {
    if workers == 1 {
        return f();
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if workers > 0 {
        builder = builder.num_threads(workers);
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Sequential fallback: runs `f` directly.
#[cfg(not(feature = "parallel"))]
pub fn with_workers<T, F: FnOnce() -> T>(_workers: usize, f: F) -> T {
    f()
}
