//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers fan out over rayon; without it
//! every call runs on the current thread. Results are always returned in
//! input order, so output never depends on scheduling. `BCORE_THREADS`
//! caps the worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

pub const THREADS_ENV: &str = "BCORE_THREADS";

#[cfg(feature = "parallel")]
fn pool() -> Option<&'static rayon::ThreadPool> {
    use std::sync::OnceLock;
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let n: usize = std::env::var(THREADS_ENV).ok()?.trim().parse().ok()?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .ok()
    })
    .as_ref()
}

#[cfg(feature = "parallel")]
fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match pool() {
        Some(p) => p.install(f),
        None => f(),
    }
}

/// `(0..n).map(f)` collected in order.
pub fn map_range<R, F>(n: usize, exec: Execution, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => install(|| (0..n).into_par_iter().map(f).collect()),
        _ => (0..n).map(f).collect(),
    }
}

/// `items.iter().map(f)` collected in order.
pub fn map_slice<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => install(|| items.par_iter().map(f).collect()),
        _ => items.iter().map(f).collect(),
    }
}

/// The result for the smallest index in `0..n` where `f` returns `Some`.
pub fn find_first<R, F>(n: usize, exec: Execution, f: F) -> Option<R>
where
    R: Send,
    F: Fn(usize) -> Option<R> + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => install(|| (0..n).into_par_iter().find_map_first(f)),
        _ => (0..n).find_map(f),
    }
}
