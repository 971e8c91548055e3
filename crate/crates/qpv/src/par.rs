//! Parallel map helper with a sequential fallback.
//!
//! Batch checks (axiom sweeps, certificate batches, random-spec suites) are
//! embarrassingly parallel maps over independent inputs. With the `parallel`
//! feature enabled they run on rayon unless [`force_sequential`] was set,
//! which the benchmark suite uses to compare both paths inside one binary.
//! Without the feature the sequential path is the only one compiled.

#[cfg(feature = "parallel")]
use std::sync::atomic::{AtomicBool, Ordering};

#[cfg(feature = "parallel")]
static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Force the sequential code path at runtime even when compiled with rayon.
#[cfg(feature = "parallel")]
pub fn force_sequential(v: bool) {
    FORCE_SEQUENTIAL.store(v, Ordering::SeqCst);
}

#[cfg(not(feature = "parallel"))]
pub fn force_sequential(_v: bool) {}

/// True when calls to [`map`] will actually fan out across threads.
#[cfg(feature = "parallel")]
pub fn is_parallel() -> bool {
    !FORCE_SEQUENTIAL.load(Ordering::SeqCst)
}

#[cfg(not(feature = "parallel"))]
pub fn is_parallel() -> bool {
    false
}

/// Map `f` over `items`, in parallel when available.
///
/// Results come back in input order either way.
#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    if is_parallel() {
        items.into_par_iter().map(f).collect()
    } else {
        items.into_iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}
