//! Rayon-backed executor. `ESSPEC_THREADS` caps the worker count (0 or unset = auto).

use esspec_core::Executor;
use rayon::prelude::*;

pub struct Pool {
    pool: Option<rayon::ThreadPool>,
}

impl Pool {
    /// `threads == 0` means one worker per core; 1 runs inline.
    pub fn new(threads: usize) -> Pool {
        if threads == 1 {
            return Pool { pool: None };
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .thread_name(|i| format!("esspec-{i}"))
            .build()
            .ok();
        Pool { pool }
    }

    pub fn from_env() -> Pool {
        Pool::new(threads_from_env(
            std::env::var("ESSPEC_THREADS").ok().as_deref(),
        ))
    }

    pub fn threads(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }
}

/// Unparsable values fall back to auto.
pub fn threads_from_env(v: Option<&str>) -> usize {
    v.and_then(|s| s.trim().parse().ok()).unwrap_or(0)
}

impl Executor for Pool {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        match &self.pool {
            None => (0..n).map(f).collect(),
            // indexed collect keeps job order
            Some(p) => p.install(|| (0..n).into_par_iter().map(&f).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let p = Pool::new(4);
        let v = p.map(1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
        assert_eq!(Pool::new(1).threads(), 1);
    }

    #[test]
    fn env_parsing() {
        assert_eq!(threads_from_env(None), 0);
        assert_eq!(threads_from_env(Some("3")), 3);
        assert_eq!(threads_from_env(Some("lots")), 0);
    }
}
