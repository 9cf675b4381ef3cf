//! Data-parallel map over independent jobs (restarts, trials).
//!
//! With the `parallel` feature the jobs run on the rayon pool; without it they
//! run in order on the calling thread. Results come back in index order either
//! way, and every job derives its randomness from its own index, so output is
//! identical in both modes.

use std::ops::Range;

#[cfg(feature = "parallel")]
pub fn map_range<T, F>(range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    range.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<T, F>(range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    range.map(f).collect()
}

/// Sequential map regardless of features; used as the comparison baseline.
pub fn map_range_seq<T, F>(range: Range<usize>, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    range.map(f).collect()
}

/// Jobs in flight at once.
pub fn width() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
