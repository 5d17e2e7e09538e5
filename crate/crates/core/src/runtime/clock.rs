//! Time sources. Everything the engine reads about time goes through
//! [`Clock`], so tests and simulations can run on virtual time.

use std::fmt;
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

pub trait Clock: Send + Sync + fmt::Debug {
    /// Nanoseconds since the Unix epoch. Never decreases.
    fn now_ns(&self) -> i64;

    /// True for clocks that only move when told to.
    fn is_virtual(&self) -> bool {
        false
    }
}

/// Wall-clock time anchored once at creation and advanced by a monotonic
/// timer, so readings never go backwards.
#[derive(Debug, Clone)]
pub struct SystemClock {
    base_ns: i64,
    origin: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        let base = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
        Self {
            base_ns: duration_ns(base),
            origin: Instant::now(),
        }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now_ns(&self) -> i64 {
        self.base_ns.saturating_add(duration_ns(self.origin.elapsed()))
    }
}

/// Virtual clock shared by clones.
#[derive(Debug, Clone, Default)]
pub struct ManualClock {
    ns: Arc<AtomicI64>,
}

impl ManualClock {
    pub fn new(start_ns: i64) -> Self {
        Self {
            ns: Arc::new(AtomicI64::new(start_ns)),
        }
    }

    pub fn set(&self, ns: i64) {
        self.ns.fetch_max(ns, Ordering::SeqCst);
    }

    pub fn advance(&self, d: Duration) {
        self.ns.fetch_add(duration_ns(d), Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now_ns(&self) -> i64 {
        self.ns.load(Ordering::SeqCst)
    }

    fn is_virtual(&self) -> bool {
        true
    }
}

pub fn duration_ns(d: Duration) -> i64 {
    i64::try_from(d.as_nanos()).unwrap_or(i64::MAX)
}
