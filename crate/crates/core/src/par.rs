//! Deterministic fan-out over independent tasks.

use crate::error::Result;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Run `f` over `0..count` on up to `jobs` threads; results come back in
/// index order regardless of scheduling. The first error wins.
pub fn run_indexed<R, F>(count: usize, jobs: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize) -> Result<R> + Sync,
{
    if count == 0 {
        return Ok(Vec::new());
    }
    let jobs = jobs.max(1).min(count);
    if jobs == 1 {
        return (0..count).map(f).collect();
    }
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..count).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let failure: Mutex<Option<crate::error::Error>> = Mutex::new(None);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count || failure.lock().unwrap().is_some() {
                    return;
                }
                match f(i) {
                    Ok(r) => slots.lock().unwrap()[i] = Some(r),
                    Err(e) => {
                        failure.lock().unwrap().get_or_insert(e);
                        return;
                    }
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("all slots filled"))
        .collect())
}
