use rayon::prelude::*;

use fpoly_core::experiments::Executor;
use fpoly_core::Result;

/// Runs replicates on the current rayon pool. Results come back in
/// replicate order, so reports do not depend on the thread count.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl Executor for Rayon {
    fn map_replicates<T, F>(&self, n: u32, job: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u32) -> Result<T> + Sync + Send,
    {
        (0..n).into_par_iter().map(job).collect()
    }
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}
