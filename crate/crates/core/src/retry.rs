//! Retry schedules and a request-rate limiter shared by the HTTP clients.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
    pub jitter: bool,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(30),
            jitter: true,
        }
    }
}

impl RetryPolicy {
    pub fn no_delay(max_retries: u32) -> Self {
        RetryPolicy {
            max_retries,
            base_delay: Duration::ZERO,
            max_delay: Duration::ZERO,
            jitter: false,
        }
    }

    pub fn backoff(&self, seed: u64) -> Backoff {
        Backoff {
            policy: self.clone(),
            retries: 0,
            last: Duration::ZERO,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

/// Per-request exponential backoff. Delays never decrease from one retry to the next.
#[derive(Debug)]
pub struct Backoff {
    policy: RetryPolicy,
    retries: u32,
    last: Duration,
    rng: ChaCha8Rng,
}

impl Backoff {
    pub fn retries(&self) -> u32 {
        self.retries
    }

    /// Delay before the next retry, or `None` once retries are exhausted.
    pub fn next_delay(&mut self) -> Option<Duration> {
        self.next_delay_at_least(Duration::ZERO)
    }

    /// As [`Backoff::next_delay`], but no shorter than `floor` (a server's
    /// `Retry-After`), still capped by the policy's maximum delay.
    pub fn next_delay_at_least(&mut self, floor: Duration) -> Option<Duration> {
        if self.retries >= self.policy.max_retries {
            return None;
        }
        let exp = self
            .policy
            .base_delay
            .saturating_mul(1u32 << self.retries.min(20))
            .min(self.policy.max_delay);
        let mut delay = if self.policy.jitter && !exp.is_zero() {
            // equal jitter: [exp/2, exp]
            let half = exp / 2;
            half + exp.mul_f64(self.rng.gen::<f64>() * 0.5)
        } else {
            exp
        };
        delay = delay.max(floor.min(self.policy.max_delay)).max(self.last);
        self.retries += 1;
        self.last = delay;
        Some(delay)
    }
}

/// Spaces request starts at least `1 / rate` seconds apart across threads.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    next_slot: Mutex<Option<Instant>>,
}

impl RateLimiter {
    /// `requests_per_second <= 0` disables limiting.
    pub fn new(requests_per_second: f64) -> Self {
        let interval = if requests_per_second > 0.0 && requests_per_second.is_finite() {
            Duration::from_secs_f64(1.0 / requests_per_second)
        } else {
            Duration::ZERO
        };
        RateLimiter {
            interval,
            next_slot: Mutex::new(None),
        }
    }

    pub fn acquire(&self) {
        if self.interval.is_zero() {
            return;
        }
        let wait = {
            let mut slot = self.next_slot.lock().unwrap_or_else(|e| e.into_inner());
            let now = Instant::now();
            let start = slot.map_or(now, |s| s.max(now));
            *slot = Some(start + self.interval);
            start - now
        };
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
    }
}
