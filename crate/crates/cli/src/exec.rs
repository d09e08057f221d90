use liyau_core::probe::Executor;
use rayon::prelude::*;

/// Thread-pool executor; output order matches the sequential one.
pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    /// `jobs = None` uses every available core.
    pub fn new(jobs: Option<usize>) -> Result<Self, rayon::ThreadPoolBuildError> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = jobs {
            b = b.num_threads(j);
        }
        Ok(Self { pool: b.build()? })
    }
}

impl Executor for Pool {
    fn map<T: Send>(&self, n: usize, f: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}
