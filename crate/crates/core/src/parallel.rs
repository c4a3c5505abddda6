//! Per-index data-parallel map with a caller-chosen worker count.
//!
//! Every worker writes only its own output slots and results are collected
//! in index order, so the output never depends on the number of workers.

/// Number of worker threads. `Workers::default()` uses all hardware threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Workers(Option<usize>);

impl Workers {
    pub fn new(count: usize) -> Self {
        Workers(Some(count.max(1)))
    }

    pub fn single() -> Self {
        Workers(Some(1))
    }

    pub fn count(&self) -> Option<usize> {
        self.0
    }

    /// Threads actually used.
    pub fn effective(&self) -> usize {
        match self.0 {
            Some(w) => w,
            #[cfg(feature = "parallel")]
            None => rayon::current_num_threads(),
            #[cfg(not(feature = "parallel"))]
            None => 1,
        }
    }
}

#[cfg(feature = "parallel")]
pub(crate) fn map_indices<T, F>(n: usize, workers: Workers, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;

    match workers.0 {
        Some(1) => (0..n).map(f).collect(),
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
            Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            // Thread spawning can fail in constrained sandboxes; the result is
            // the same either way.
            Err(_) => (0..n).map(f).collect(),
        },
        None => (0..n).into_par_iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indices<T, F>(n: usize, _workers: Workers, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
