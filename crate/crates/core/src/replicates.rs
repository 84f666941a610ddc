//! Replicate fan-out. Results come back in replicate order whatever the
//! number of worker threads, so every aggregate is reproducible.
//!
//! With the `parallel` feature the work runs on the current rayon pool; wrap a
//! call in `ThreadPool::install` to choose the worker count.

#[cfg(feature = "parallel")]
pub fn map_replicates<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_replicates<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..count).map(f).collect()
}

/// Like [`map_replicates`], but each chunk of consecutive replicates shares
/// one piece of per-worker scratch state built by `init`.
#[cfg(feature = "parallel")]
pub fn map_replicates_with<S, T, I, F>(count: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map_init(&init, |s, i| f(s, i)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_replicates_with<S, T, I, F>(count: usize, init: I, f: F) -> Vec<T>
where
    I: Fn() -> S,
    F: Fn(&mut S, usize) -> T,
{
    let mut s = init();
    (0..count).map(|i| f(&mut s, i)).collect()
}
