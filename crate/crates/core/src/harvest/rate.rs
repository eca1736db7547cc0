use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::source::SourceError;

/// Time source for the rate gate, swappable in tests.
pub trait Clock: Send + Sync {
    /// Monotonic time since an arbitrary origin.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock { origin: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// Virtual clock; sleeping advances it instantly.
#[derive(Default)]
pub struct ManualClock {
    now: Mutex<Duration>,
}

impl ManualClock {
    pub fn advance(&self, d: Duration) {
        *self.now.lock().unwrap() += d;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        *self.now.lock().unwrap()
    }

    fn sleep(&self, d: Duration) {
        self.advance(d);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Politeness {
    pub min_delay_ms: u64,
    /// extra uniform delay in 0..=jitter_ms
    pub jitter_ms: u64,
    pub max_retries: u32,
    /// first backoff pause; doubles per retry
    pub backoff_ms: u64,
    pub seed: u64,
}

impl Default for Politeness {
    fn default() -> Self {
        Politeness {
            min_delay_ms: 5_000,
            jitter_ms: 5_000,
            max_retries: 5,
            backoff_ms: 30_000,
            seed: 0,
        }
    }
}

impl Politeness {
    /// No waiting at all, for replay sources.
    pub fn none() -> Self {
        Politeness {
            min_delay_ms: 0,
            jitter_ms: 0,
            backoff_ms: 0,
            ..Self::default()
        }
    }
}

/// Serializes outbound requests with a minimum gap and retries transient
/// failures with exponential backoff.
pub struct RateGate {
    politeness: Politeness,
    clock: Arc<dyn Clock>,
    state: Mutex<GateState>,
}

struct GateState {
    rng: ChaCha8Rng,
    last: Option<Duration>,
    requests: u64,
}

/// A call that failed after every retry.
#[derive(Debug, Clone, PartialEq)]
pub struct Exhausted {
    pub attempts: u32,
    pub error: SourceError,
}

impl RateGate {
    pub fn new(politeness: Politeness, clock: Arc<dyn Clock>) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(politeness.seed);
        RateGate {
            politeness,
            clock,
            state: Mutex::new(GateState { rng, last: None, requests: 0 }),
        }
    }

    pub fn system(politeness: Politeness) -> Self {
        Self::new(politeness, Arc::new(SystemClock::default()))
    }

    pub fn politeness(&self) -> &Politeness {
        &self.politeness
    }

    /// Requests issued so far, retries included.
    pub fn requests(&self) -> u64 {
        self.state.lock().unwrap().requests
    }

    /// Runs `f` behind the gate. Non-transient errors are returned at once.
    pub fn call<T>(&self, mut f: impl FnMut() -> Result<T, SourceError>) -> Result<T, Exhausted> {
        let mut state = self.state.lock().unwrap();
        let mut attempt = 0u32;
        loop {
            let gap = self.politeness.min_delay_ms
                + if self.politeness.jitter_ms > 0 {
                    state.rng.gen_range(0..=self.politeness.jitter_ms)
                } else {
                    0
                };
            if let Some(last) = state.last {
                let due = last + Duration::from_millis(gap);
                let now = self.clock.now();
                if due > now {
                    self.clock.sleep(due - now);
                }
            }
            state.last = Some(self.clock.now());
            state.requests += 1;
            attempt += 1;
            match f() {
                Ok(v) => return Ok(v),
                Err(e) if e.is_transient() && attempt <= self.politeness.max_retries => {
                    let pause = self.politeness.backoff_ms.saturating_mul(1 << (attempt - 1).min(20));
                    tracing::warn!(attempt, pause_ms = pause, error = %e, "source request failed, backing off");
                    self.clock.sleep(Duration::from_millis(pause));
                }
                Err(error) => return Err(Exhausted { attempts: attempt, error }),
            }
        }
    }
}
