//! Thread-pool plumbing.  `SEMISOBOLEV_THREADS` caps the number of worker
//! threads used by every parallel section of the crate.

use std::sync::OnceLock;

/// Name of the environment variable that caps parallelism.
pub const THREADS_ENV: &str = "SEMISOBOLEV_THREADS";

fn pool() -> Option<&'static rayon::ThreadPool> {
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let n: usize = std::env::var(THREADS_ENV).ok()?.trim().parse().ok()?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().ok()
    })
    .as_ref()
}

/// Run `f` inside the capped pool when `SEMISOBOLEV_THREADS` is set, or in
/// the global rayon pool otherwise.
pub fn install<R: Send, F: FnOnce() -> R + Send>(f: F) -> R {
    match pool() {
        Some(p) if p.current_thread_index().is_none() => p.install(f),
        _ => f(),
    }
}
