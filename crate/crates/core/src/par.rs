//! Data-parallel execution with a sequential fallback.
//!
//! Every parallel loop in the crate goes through [`Execution::map`], which
//! returns results in index order regardless of scheduling. Reductions are then
//! done sequentially over that ordered vector, so results are bit-identical
//! across thread counts and between the two modes.

/// How index-parallel loops are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses the rayon global (or installed) pool when the `parallel` feature is
    /// enabled; falls back to sequential otherwise.
    #[default]
    Parallel,
}

impl Execution {
    /// Evaluate `f(0..n)` and collect in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            Execution::Parallel => par_map(n, f),
        }
    }

    /// Whether this mode actually runs on multiple threads in this build.
    pub fn is_parallel(self) -> bool {
        matches!(self, Execution::Parallel) && cfg!(feature = "parallel")
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Pairwise (cascade) summation; order-fixed and more stable than a running sum.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_bitwise() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let a = Execution::Sequential.map(1000, f);
        let b = Execution::Parallel.map(1000, f);
        assert_eq!(a, b);
        assert_eq!(pairwise_sum(&a).to_bits(), pairwise_sum(&b).to_bits());
    }

    #[test]
    fn pairwise_sum_matches_exact_sum() {
        let xs: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 5050.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
