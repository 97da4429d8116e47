//! Execution layer: data-parallel map/search with a sequential fallback.
//!
//! With the `parallel` feature enabled the functions here fan work out over
//! rayon while preserving input order, so results are identical to the
//! sequential build. A process-wide override forces sequential execution at
//! runtime, which is what the benchmark suite uses to compare both modes in
//! a single binary.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Force sequential execution even when the `parallel` feature is compiled in.
pub fn set_sequential_override(v: bool) {
    FORCE_SEQUENTIAL.store(v, Ordering::Relaxed);
}

/// True when work should run sequentially.
pub fn sequential() -> bool {
    if cfg!(not(feature = "parallel")) {
        return true;
    }
    FORCE_SEQUENTIAL.load(Ordering::Relaxed)
}

/// Order-preserving map over a slice.
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !sequential() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

/// Order-preserving map over an index range.
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !sequential() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// First `Some` result in index order, searching candidates in parallel.
pub fn find_map_first<U, F>(n: usize, f: F) -> Option<U>
where
    U: Send,
    F: Fn(usize) -> Option<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !sequential() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().find_map_first(f);
        }
    }
    (0..n).find_map(f)
}
