#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution policy for the data-parallel loops of the crate.
///
/// `Parallel` falls back to sequential execution when the crate is built
/// without the `parallel` feature. Both policies produce bit-identical
/// results: every parallel loop writes independent outputs and any reduction
/// happens afterwards in index order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// `(0..n).map(f)` collected in index order.
    pub(crate) fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Applies `f(i, &mut out[i])` to every element; `min_len` bounds the
    /// smallest chunk handed to a worker.
    pub(crate) fn fill<T, F>(self, out: &mut [T], min_len: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && out.len() >= min_len {
            out.par_iter_mut().with_min_len(min_len.max(1)).enumerate().for_each(|(i, x)| f(i, x));
            return;
        }
        let _ = min_len;
        out.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }
}
