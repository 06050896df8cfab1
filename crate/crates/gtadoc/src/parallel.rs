//! Thread-pool executor.

use gtadoc_core::Executor;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::CliError;

/// Runs rounds on a private pool of `n` threads, or inline when `n == 1`.
pub struct Workers {
    pool: Option<ThreadPool>,
    n: usize,
}

impl Workers {
    pub fn new(n: usize) -> Result<Self, CliError> {
        if n == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        let pool = if n == 1 {
            None
        } else {
            let pool = ThreadPoolBuilder::new()
                .num_threads(n)
                .thread_name(|i| format!("gtadoc-{i}"))
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))?;
            Some(pool)
        };
        Ok(Self { pool, n })
    }
}

impl Executor for Workers {
    fn workers(&self) -> usize {
        self.n
    }

    fn for_each<F>(&self, n: usize, f: F)
    where
        F: Fn(usize) + Sync + Send,
    {
        match &self.pool {
            None => (0..n).for_each(f),
            Some(p) => p.install(|| (0..n).into_par_iter().with_max_len(1).for_each(f)),
        }
    }

    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match &self.pool {
            None => (0..n).map(f).collect(),
            Some(p) => p.install(|| (0..n).into_par_iter().with_max_len(1).map(f).collect()),
        }
    }
}
