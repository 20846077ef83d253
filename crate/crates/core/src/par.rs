//! Data-parallel helpers. With the `parallel` feature the work is spread over
//! rayon's pool; without it every helper runs sequentially. Results are
//! always returned in index order so outputs do not depend on worker count.

use std::ops::Range;

/// Execution strategy for the exhaustive sweeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    /// Use the rayon pool when the crate is built with `parallel`.
    #[default]
    Parallel,
}

impl Parallelism {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

/// `range.map(f).collect()`, in index order.
pub fn map_collect<R, F>(range: Range<usize>, par: Parallelism, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().map(f).collect();
    }
    let _ = par;
    range.map(f).collect()
}

/// First index (in order) for which `f` returns `Some`.
pub fn find_map_first<R, F>(range: Range<usize>, par: Parallelism, f: F) -> Option<R>
where
    R: Send,
    F: Fn(usize) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().find_map_first(f);
    }
    let _ = par;
    range.into_iter().find_map(f)
}

/// Parallel map over a slice, order preserved.
pub fn map_slice<T, R, F>(items: &[T], par: Parallelism, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_collect(0..items.len(), par, |i| f(&items[i]))
}
