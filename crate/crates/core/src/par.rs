//! Restart and batch execution.
//!
//! Every randomized optimizer in this crate runs a number of independent
//! restarts. Each restart draws from its own ChaCha stream keyed by
//! `(seed, restart index)`, so results do not depend on scheduling and the
//! sequential and parallel paths return identical values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How independent work items are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise
    /// falls back to sequential execution.
    #[default]
    Parallel,
}

/// Restart count, seed and execution mode shared by the optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub restarts: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl SearchOptions {
    pub const DEFAULT_RESTARTS: usize = 50;

    pub fn new(restarts: usize, seed: u64) -> Self {
        Self {
            restarts,
            seed,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

/// RNG for restart `index` under `seed`.
pub fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Evaluates `f(0..n)` and returns results in index order.
pub fn map_indexed<T, F>(n: usize, execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match execution {
        Execution::Sequential => (0..n).map(f).collect(),
        Execution::Parallel => parallel_map(n, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Index of the smallest key; ties go to the lowest index.
pub fn argmin_by_key<T>(items: &[T], key: impl Fn(&T) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, item) in items.iter().enumerate() {
        let k = key(item);
        match best {
            Some((_, b)) if k.partial_cmp(&b) != Some(std::cmp::Ordering::Less) => {}
            _ => best = Some((i, k)),
        }
    }
    best.map(|(i, _)| i)
}
