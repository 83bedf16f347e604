//! Deterministic fan-out over independent trials.
//!
//! Results are collected into trial order regardless of scheduling, so every
//! reduction downstream sees the same sequence with or without threads.

#[cfg(feature = "parallel")]
pub(crate) fn map_trials<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_trials<T, F>(n: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..n).map(f).collect()
}
