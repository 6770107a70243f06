//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) batch operations run on rayon;
//! without it, or with [`Execution::Sequential`], they run on the calling
//! thread. Results are always returned in input order.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// `Parallel` when the crate was built with rayon, otherwise `Sequential`.
    pub fn effective(self) -> Execution {
        if cfg!(feature = "parallel") {
            self
        } else {
            Execution::Sequential
        }
    }
}

pub fn map_indexed<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec.effective() {
        Execution::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel => unreachable!(),
    }
}

/// Runs `f` over `items` with at most `workers` running at once.
///
/// Used for pipelines whose per-item work blocks on a backend; the bound is
/// the in-flight limit rather than the CPU count.
pub fn map_bounded<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    #[cfg(feature = "parallel")]
    if workers > 1 {
        use rayon::prelude::*;
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => return pool.install(|| items.par_iter().map(&f).collect()),
            Err(err) => log::warn!("falling back to sequential execution: {err}"),
        }
    }
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn order_preserved() {
        let items: Vec<u32> = (0..1000).collect();
        let seq = map_indexed(&items, Execution::Sequential, |x| x * 2);
        let par = map_indexed(&items, Execution::Parallel, |x| x * 2);
        assert_eq!(seq, par);
        assert_eq!(map_bounded(&items, 4, |x| x * 2), seq);
    }

    #[test]
    fn bounded_workers() {
        let live = AtomicUsize::new(0);
        let peak = AtomicUsize::new(0);
        let items: Vec<u32> = (0..64).collect();
        map_bounded(&items, 3, |_| {
            let now = live.fetch_add(1, Ordering::SeqCst) + 1;
            peak.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(std::time::Duration::from_millis(2));
            live.fetch_sub(1, Ordering::SeqCst);
        });
        assert!(peak.load(Ordering::SeqCst) <= 3);
    }
}
