//! Pending-signal counters read by the `signal` predicate.

use std::sync::atomic::{AtomicU64, Ordering};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sig {
    Usr1,
    Usr2,
}

impl Sig {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "SIGUSR1" => Some(Sig::Usr1),
            "SIGUSR2" => Some(Sig::Usr2),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sig::Usr1 => "SIGUSR1",
            Sig::Usr2 => "SIGUSR2",
        }
    }
}

/// Delivered-but-unconsumed signal counts. Incremented from signal
/// handlers, decremented by each true evaluation of `signal(...)`.
#[derive(Debug, Default)]
pub struct SignalCounters {
    usr1: AtomicU64,
    usr2: AtomicU64,
}

impl SignalCounters {
    pub fn new() -> Self {
        Self::default()
    }

    fn slot(&self, sig: Sig) -> &AtomicU64 {
        match sig {
            Sig::Usr1 => &self.usr1,
            Sig::Usr2 => &self.usr2,
        }
    }

    /// Record one delivery. Async-signal-safe.
    pub fn deliver(&self, sig: Sig) {
        self.slot(sig).fetch_add(1, Ordering::SeqCst);
    }

    /// Consume one pending delivery if there is one.
    pub fn take(&self, sig: Sig) -> bool {
        self.slot(sig)
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1))
            .is_ok()
    }

    pub fn pending(&self, sig: Sig) -> u64 {
        self.slot(sig).load(Ordering::SeqCst)
    }
}
