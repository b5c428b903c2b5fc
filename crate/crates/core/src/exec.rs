//! Execution policy for the data-parallel loops (trial sweeps, grid points).
//!
//! With the `parallel` feature the [`Exec::Parallel`] policy dispatches work
//! onto rayon; without it every policy runs sequentially. Results are always
//! collected in input order and reductions go through [`pairwise_sum`], so the
//! output never depends on the number of workers.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Map `f` over `items`, preserving order.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Map `f` over `0..len`, preserving order.
    pub fn map_range<U, F>(self, len: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..len).into_par_iter().map(f).collect(),
            _ => (0..len).map(f).collect(),
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Run `f` inside a pool with `jobs` workers (0 = rayon default).
///
/// Falls back to a plain call when the `parallel` feature is off.
pub fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        f()
    }
}

/// Deterministic pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_under_both_policies() {
        let items: Vec<usize> = (0..1000).collect();
        let a = Exec::Sequential.map(&items, |i| i * i);
        let b = Exec::Parallel.map(&items, |i| i * i);
        assert_eq!(a, b);
        assert_eq!(Exec::Parallel.map_range(5, |i| i + 1), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn pairwise_sum_is_accurate() {
        let v = vec![0.1; 10_000];
        assert!((pairwise_sum(&v) - 1000.0).abs() < 1e-10);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn with_jobs_returns_value() {
        assert_eq!(with_jobs(2, || Exec::Parallel.map_range(3, |i| i).len()), 3);
    }
}
