//! Thread-count control. Results never depend on the thread count; this
//! only bounds resource use.

use std::sync::OnceLock;

pub const THREADS_ENV: &str = "STACKPLANE_THREADS";

/// Parse a thread cap; `None` for unset, empty, zero or garbage.
pub fn parse_threads(v: Option<&str>) -> Option<usize> {
    v.and_then(|s| s.trim().parse::<usize>().ok()).filter(|&n| n > 0)
}

/// Size the global pool from `STACKPLANE_THREADS` once. Returns the number
/// of threads in use.
pub fn init_from_env() -> usize {
    static DONE: OnceLock<()> = OnceLock::new();
    DONE.get_or_init(|| {
        if let Some(n) = parse_threads(std::env::var(THREADS_ENV).ok().as_deref()) {
            // Fails only if the pool already exists, which is harmless.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    });
    rayon::current_num_threads()
}

/// Run `f` on a private pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsing() {
        assert_eq!(parse_threads(Some("4")), Some(4));
        assert_eq!(parse_threads(Some(" 2 ")), Some(2));
        assert_eq!(parse_threads(Some("0")), None);
        assert_eq!(parse_threads(Some("many")), None);
        assert_eq!(parse_threads(None), None);
        assert_eq!(with_threads(3, rayon::current_num_threads), 3);
    }
}
