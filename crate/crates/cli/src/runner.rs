//! Parallel batch execution.

use rayon::prelude::*;
use rayon::ThreadPool;
use taxrisk_core::engine::{RuinRecord, Simulator};
use taxrisk_core::estimators::Batch;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "TAXRISK_WORKERS";

pub struct Runner {
    pool: ThreadPool,
}

impl Runner {
    /// `workers = 0` uses `TAXRISK_WORKERS`, then the number of CPUs.
    pub fn new(workers: usize) -> Self {
        let workers = if workers > 0 {
            workers
        } else {
            std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()).unwrap_or(0)
        };
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
        Runner { pool }
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Replicas `0..n` of `sim`; the records come back in replica order.
    pub fn records(&self, sim: &Simulator, n: u64, seed: u64) -> Vec<RuinRecord> {
        self.pool.install(|| (0..n).into_par_iter().map(|r| sim.run_replica(seed, r)).collect())
    }

    pub fn batch(&self, sim: &Simulator, n: u64, seed: u64) -> Batch {
        Batch::new(sim, self.records(sim, n, seed))
    }
}

/// Seed for one batch of an experiment, mixed from the experiment seed, the
/// level and a role tag so batches at different levels are independent.
pub fn batch_seed(seed: u64, u: f64, role: u64) -> u64 {
    let mut z = seed ^ u.to_bits().rotate_left(17) ^ role.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    // splitmix64 finaliser
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
