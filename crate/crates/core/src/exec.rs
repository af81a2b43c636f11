//! Execution-mode plumbing: data-parallel map with a sequential fallback.
//!
//! Every parallel site in this crate maps independent work items to a
//! `Vec` (positional collect) and reduces sequentially afterwards, so
//! results are bit-identical across thread counts and across the two
//! modes. Thread count is controlled by `RAYON_NUM_THREADS`.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How to schedule independent work items.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Sequential,
    /// Falls back to sequential when the `parallel` feature is disabled.
    Parallel,
}

impl Default for Mode {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        Mode::Parallel
    }
    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        Mode::Sequential
    }
}

/// Map `f` over `items`, preserving order.
pub fn map_collect<T, U, F>(mode: Mode, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    match mode {
        Mode::Sequential => items.iter().map(&f).collect(),
        #[cfg(feature = "parallel")]
        Mode::Parallel => items.par_iter().map(&f).collect(),
        #[cfg(not(feature = "parallel"))]
        Mode::Parallel => items.iter().map(&f).collect(),
    }
}
