//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature the policy can be switched at runtime, which is
//! what the benches use to compare both paths in one binary. Without the
//! feature everything runs sequentially.

use std::cell::Cell;
use std::sync::atomic::{AtomicU8, Ordering};

/// Stack for evaluation threads. Evaluation recurses once per unfolding,
/// so deep fuel needs more than the platform default.
pub const STACK_BYTES: usize = 256 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Sequential,
    Parallel,
}

thread_local! {
    static BIG_STACK: Cell<bool> = const { Cell::new(false) };
}

static POLICY: AtomicU8 = AtomicU8::new(1);

pub fn set_policy(p: Policy) {
    POLICY.store(matches!(p, Policy::Parallel) as u8, Ordering::Relaxed);
}

pub fn policy() -> Policy {
    if cfg!(feature = "parallel") && POLICY.load(Ordering::Relaxed) == 1 {
        Policy::Parallel
    } else {
        Policy::Sequential
    }
}

#[cfg(feature = "parallel")]
static POOL: std::sync::Once = std::sync::Once::new();

#[cfg(feature = "parallel")]
fn ensure_pool(threads: Option<usize>) {
    POOL.call_once(|| {
        let mut b =
            rayon::ThreadPoolBuilder::new().stack_size(STACK_BYTES).start_handler(|_| BIG_STACK.with(|c| c.set(true)));
        if let Some(n) = threads {
            b = b.num_threads(n.max(1));
        }
        let _ = b.build_global();
    });
}

/// Sizes the global pool from `TVP_THREADS` if set. Call once, early.
pub fn init_threads_from_env() {
    let n = std::env::var("TVP_THREADS").ok().and_then(|v| v.parse::<usize>().ok());
    if matches!(n, Some(k) if k <= 1) {
        set_policy(Policy::Sequential);
    }
    #[cfg(feature = "parallel")]
    ensure_pool(n);
}

/// Runs `f` with a [`STACK_BYTES`] stack: inline on pool workers and on
/// threads started here, otherwise on a fresh thread.
///
/// Pool workers must not block on a helper thread: with one worker, a
/// nested [`map`] from the helper would wait on the blocked worker forever.
pub fn with_stack<R, F>(f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    if BIG_STACK.with(Cell::get) {
        return f();
    }
    std::thread::scope(|s| {
        let h = std::thread::Builder::new()
            .stack_size(STACK_BYTES)
            .spawn_scoped(s, || {
                BIG_STACK.with(|c| c.set(true));
                f()
            })
            .expect("spawn evaluator thread");
        h.join().unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}

/// Order-preserving map. Results are identical under either policy.
pub fn map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if policy() == Policy::Parallel {
        use rayon::prelude::*;
        ensure_pool(None);
        return items.into_par_iter().map(f).collect();
    }
    items.into_iter().map(f).collect()
}
