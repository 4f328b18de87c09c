use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

/// Token bucket shared by every session of one provider endpoint.
#[derive(Debug)]
pub struct RateLimiter {
    capacity: f64,
    per_second: f64,
    state: Mutex<(f64, Instant)>,
}

impl RateLimiter {
    /// Allows `per_minute` requests per minute with bursts of the same size.
    pub fn new(per_minute: u32) -> Self {
        let capacity = f64::from(per_minute.max(1));
        RateLimiter {
            capacity,
            per_second: capacity / 60.0,
            state: Mutex::new((capacity, Instant::now())),
        }
    }

    /// Blocks until a token is available, then takes it.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut st = self.state.lock().unwrap_or_else(|e| e.into_inner());
                let now = Instant::now();
                let (tokens, last) = *st;
                let tokens = (tokens + now.duration_since(last).as_secs_f64() * self.per_second).min(self.capacity);
                if tokens >= 1.0 {
                    *st = (tokens - 1.0, now);
                    return;
                }
                *st = (tokens, now);
                Duration::from_secs_f64((1.0 - tokens) / self.per_second)
            };
            std::thread::sleep(wait);
        }
    }
}

/// Process-wide limiter for an endpoint; the first caller fixes its rate.
pub fn limiter_for(endpoint: &str, per_minute: u32) -> Arc<RateLimiter> {
    static LIMITERS: OnceLock<Mutex<HashMap<String, Arc<RateLimiter>>>> = OnceLock::new();
    let map = LIMITERS.get_or_init(Default::default);
    let mut map = map.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(endpoint.to_string())
        .or_insert_with(|| Arc::new(RateLimiter::new(per_minute)))
        .clone()
}
