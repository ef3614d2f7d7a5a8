//! Data-parallel execution with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`ExecMode::Parallel`] fans
//! work out over rayon's pool; without it every mode runs sequentially. Both
//! paths return results in input order, so reductions done by the caller are
//! bit-identical across modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    /// True when this mode will actually use more than one thread.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// `f` applied to every index in `0..n`, collected in order.
pub fn map_indices<R, F>(mode: ExecMode, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// `f` applied to every element of `items` with its index, in place.
pub fn for_each_mut<T, F>(mode: ExecMode, items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        items.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
        return;
    }
    let _ = mode;
    items.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

/// Like [`for_each_mut`] but the closure may fail; the first error in index
/// order is returned.
pub fn try_for_each_mut<T, E, F>(mode: ExecMode, items: &mut [T], f: F) -> Result<(), E>
where
    T: Send,
    E: Send,
    F: Fn(usize, &mut T) -> Result<(), E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        let results: Vec<Result<(), E>> = items
            .par_iter_mut()
            .enumerate()
            .map(|(i, x)| f(i, x))
            .collect();
        return results.into_iter().collect();
    }
    let _ = mode;
    items.iter_mut().enumerate().try_for_each(|(i, x)| f(i, x))
}

/// `f` over `0..n` on a dedicated pool of `workers` threads; sequential
/// when `workers <= 1` or the `parallel` feature is off.
pub fn map_with_workers<R, F>(workers: usize, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            return pool.install(|| (0..n).into_par_iter().map(&f).collect());
        }
    }
    let _ = workers;
    (0..n).map(f).collect()
}
