use std::sync::Arc;

use gmns_core::experiments::EnsembleRunner;
use rayon::prelude::*;
use rayon::ThreadPool;

/// Ensemble members on a rayon pool; results keep index order.
#[derive(Clone)]
pub struct RayonRunner {
    pool: Arc<ThreadPool>,
}

impl RayonRunner {
    /// `threads = 0` lets rayon pick.
    pub fn new(threads: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        Self { pool: Arc::new(pool) }
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl EnsembleRunner for RayonRunner {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}
