use std::sync::OnceLock;

/// Environment variable capping internal parallelism.
pub const THREADS_ENV: &str = "CONTESTNET_THREADS";

static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();

/// Shared worker pool sized from `CONTESTNET_THREADS` (all cores when unset).
pub(crate) fn pool() -> &'static rayon::ThreadPool {
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&t| t > 0)
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("failed to build worker pool")
    })
}
