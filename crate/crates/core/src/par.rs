//! Execution strategy for data-parallel loops.
//!
//! With the `parallel` feature (on by default) [`Exec::Parallel`] dispatches
//! onto the rayon pool. Without it every strategy runs sequentially. Results
//! never depend on the strategy: maps preserve order and reductions use a fixed
//! chunking with in-order combination, so floating-point sums are bitwise
//! identical across thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used by [`Exec::chunked_sum`].
pub const REDUCTION_CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Whether this strategy actually fans out in the current build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Order-preserving map.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Order-preserving map over `0..n`.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Sums `term(i)` for `i in 0..n` with a fixed association order: terms are
    /// summed left to right inside chunks of [`REDUCTION_CHUNK`], then the chunk
    /// partials are summed left to right.
    pub fn chunked_sum<S, F>(self, n: usize, term: F) -> S
    where
        S: Copy + Default + std::ops::Add<Output = S> + Send,
        F: Fn(usize) -> S + Sync + Send,
    {
        let chunks = n.div_ceil(REDUCTION_CHUNK);
        let partial = |c: usize| {
            let lo = c * REDUCTION_CHUNK;
            let hi = (lo + REDUCTION_CHUNK).min(n);
            (lo..hi).fold(S::default(), |acc, i| acc + term(i))
        };
        let partials: Vec<S> = self.map_range(chunks, partial);
        partials.into_iter().fold(S::default(), |acc, p| acc + p)
    }

    /// Applies `f` to every element of `out` together with its index.
    pub fn for_each_indexed<T, F>(self, out: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            out.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
            return;
        }
        out.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }
}
