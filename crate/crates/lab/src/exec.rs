//! Rayon-backed executor.

use cce_lab_core::exec::Executor;

/// Maps over a private rayon pool with a fixed thread count. Results are
/// collected in index order, so output is identical to the serial executor.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    pub fn new(threads: usize) -> anyhow::Result<RayonExecutor> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()?;
        Ok(RayonExecutor { pool })
    }
}

impl Executor for RayonExecutor {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        use rayon::prelude::*;
        let f = &f;
        self.pool
            .install(|| (0..n).into_par_iter().map(move |i| f(i)).collect())
    }
}
