//! Deterministic parallel map: a fixed task list consumed by a bounded
//! worker pool. Results are keyed by task index, so the output is
//! independent of worker count and scheduling order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |p| p.get())
}

pub fn parallel_map<T, F>(count: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.max(1).min(count.max(1));
    if workers == 1 {
        return (0..count).map(f).collect();
    }
    let results: Mutex<Vec<Option<T>>> = Mutex::new((0..count).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let r = f(i);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|o| o.expect("every task completed"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_ordered_regardless_of_workers() {
        let serial = parallel_map(100, 1, |i| i * i);
        for w in [2, 4, 16] {
            assert_eq!(parallel_map(100, w, |i| i * i), serial);
        }
    }

    #[test]
    fn empty_task_list() {
        let out: Vec<u32> = parallel_map(0, 4, |_| unreachable!());
        assert!(out.is_empty());
    }
}
