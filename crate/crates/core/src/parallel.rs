//! Order-preserving parallel map over independent work items.
//!
//! `TICLQ_THREADS` caps the worker count; `0` or `1` runs serially. Results
//! are collected in input order, so output never depends on the schedule.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use std::sync::OnceLock;

fn pool() -> Option<&'static ThreadPool> {
    static POOL: OnceLock<Option<ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var("TICLQ_THREADS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok());
        match threads {
            Some(0) | Some(1) => None,
            Some(n) => ThreadPoolBuilder::new().num_threads(n).build().ok(),
            None => ThreadPoolBuilder::new().build().ok(),
        }
    })
    .as_ref()
}

/// `(0..n).map(f)` collected in order, possibly on several threads.
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    match pool() {
        Some(p) if n > 1 => p.install(|| (0..n).into_par_iter().map(f).collect()),
        _ => (0..n).map(f).collect(),
    }
}
