//! Trial-level parallelism with a sequential fallback.
//!
//! With the `parallel` feature (default) trials are distributed over a rayon
//! pool. Each trial derives its own RNG stream from the index, so the output
//! is identical in both modes and for any worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map trial indices `0..trials` to values, in parallel when enabled.
pub fn run_trials<T, F>(trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..trials).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials).map(f).collect()
    }
}

/// Always-sequential variant, kept for benchmarking against the pool.
pub fn run_trials_seq<T, F>(trials: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..trials).map(f).collect()
}
