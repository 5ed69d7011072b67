//! Replication loops.
//!
//! Work is spread over the current rayon pool, but results always come back
//! in replication order and are reduced sequentially, so a run's output does
//! not depend on the number of worker threads.

use rayon::prelude::*;

/// `f(0), …, f(n-1)` evaluated in parallel, returned in order.
pub fn map_reps<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Like [`map_reps`] with a per-worker scratch value created by `init`.
pub fn map_reps_with<S, T, I, F>(n: u64, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64) -> T + Sync + Send,
{
    (0..n).into_par_iter().map_init(init, f).collect()
}

/// Runs `f` inside a dedicated pool of `threads` workers (0 = rayon default).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    pool.install(f)
}

/// Mean and standard error (sample std / √n) accumulated in slice order.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_independent_of_pool_size() {
        let f = |i: u64| (i as f64).sqrt().sin();
        let one = with_threads(1, || map_reps(1000, f));
        let four = with_threads(4, || map_reps(1000, f));
        assert_eq!(one, four);
        assert_eq!(mean_stderr(&one), mean_stderr(&four));
    }

    #[test]
    fn mean_stderr_small_cases() {
        assert!(mean_stderr(&[]).0.is_nan());
        assert_eq!(mean_stderr(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_stderr(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }
}
