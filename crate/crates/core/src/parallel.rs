//! Worker pool shared by chart filling and frame transport.

use std::sync::OnceLock;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CFH_THREADS";

/// Worker count from `CFH_THREADS`, or the available parallelism when unset or invalid.
pub fn worker_count() -> usize {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) if n > 0 => n.min(available.max(n)),
        _ => available,
    }
}

/// The process-wide pool, sized once on first use.
pub fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(worker_count())
            .thread_name(|i| format!("cfh-worker-{i}"))
            .build()
            .expect("thread pool")
    })
}
