use std::sync::{Condvar, Mutex};

use super::{Backend, GenerationError, GenerationRecord, GenerationRequest};

pub const DEFAULT_IN_FLIGHT: usize = 4;

/// Caps the number of concurrent `generate` calls reaching the inner backend.
pub struct InFlightLimit<B> {
    inner: B,
    max: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a, B> {
    limit: &'a InFlightLimit<B>,
}

impl<B> Drop for Permit<'_, B> {
    fn drop(&mut self) {
        let mut active = self.limit.active.lock().unwrap_or_else(|p| p.into_inner());
        *active -= 1;
        self.limit.freed.notify_one();
    }
}

impl<B: Backend> InFlightLimit<B> {
    pub fn new(inner: B, max: usize) -> Self {
        InFlightLimit {
            inner,
            max: max.max(1),
            active: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    pub fn max_in_flight(&self) -> usize {
        self.max
    }

    fn acquire(&self) -> Permit<'_, B> {
        let mut active = self.active.lock().unwrap_or_else(|p| p.into_inner());
        while *active >= self.max {
            active = self.freed.wait(active).unwrap_or_else(|p| p.into_inner());
        }
        *active += 1;
        Permit { limit: self }
    }
}

impl<B: Backend> Backend for InFlightLimit<B> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationRecord, GenerationError> {
        let _permit = self.acquire();
        self.inner.generate(request)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::time::Duration;

    #[derive(Default)]
    struct Counting {
        live: AtomicUsize,
        peak: AtomicUsize,
    }

    impl Backend for Counting {
        fn id(&self) -> &str {
            "counting"
        }
        fn generate(&self, request: &GenerationRequest) -> Result<GenerationRecord, GenerationError> {
            let now = self.live.fetch_add(1, Ordering::SeqCst) + 1;
            self.peak.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(Duration::from_millis(3));
            self.live.fetch_sub(1, Ordering::SeqCst);
            Ok(GenerationRecord::new(
                request,
                vec![String::new()],
                "counting",
                Duration::ZERO,
            ))
        }
    }

    #[test]
    fn never_exceeds_bound() {
        let limited = InFlightLimit::new(Counting::default(), 2);
        std::thread::scope(|s| {
            for _ in 0..8 {
                s.spawn(|| {
                    for _ in 0..5 {
                        limited.generate(&GenerationRequest::new("p")).unwrap();
                    }
                });
            }
        });
        let peak = limited.inner.peak.load(Ordering::SeqCst);
        assert!((1..=2).contains(&peak), "peak {peak}");
    }
}
