//! Fan-out of independent seeded runs.
//!
//! With the `parallel` feature, runs execute on the rayon pool; otherwise (and
//! always for throughput measurement) they execute one after another. Results
//! come back in run order either way.

/// Evaluates `f(0), f(1), ..., f(runs - 1)` sequentially.
pub fn map_sequential<T, F>(runs: u32, f: F) -> Vec<T>
where
    F: Fn(u32) -> T,
{
    (0..runs).map(f).collect()
}

/// Evaluates `f` for every run index on the rayon pool.
#[cfg(feature = "parallel")]
pub fn map_parallel<T, F>(runs: u32, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u32) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..runs).into_par_iter().map(f).collect()
}

/// Parallel when the `parallel` feature is enabled, sequential otherwise.
pub fn map_runs<T, F>(runs: u32, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u32) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(runs, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(runs, f)
    }
}
