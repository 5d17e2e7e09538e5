//! Routing SIGUSR1/SIGUSR2 deliveries into [`SignalCounters`].

use std::io;
use std::sync::Arc;

use signal_hook::consts::{SIGUSR1, SIGUSR2};
use signal_hook::SigId;

use crate::runtime::{Sig, SignalCounters};

/// Handlers stay installed until this is dropped.
#[derive(Debug)]
pub struct SignalRegistration {
    ids: Vec<SigId>,
    counters: Arc<SignalCounters>,
}

impl SignalRegistration {
    pub fn counters(&self) -> &Arc<SignalCounters> {
        &self.counters
    }
}

impl Drop for SignalRegistration {
    fn drop(&mut self) {
        for id in self.ids.drain(..) {
            signal_hook::low_level::unregister(id);
        }
    }
}

/// Count every SIGUSR1/SIGUSR2 delivered to the process in `counters`.
pub fn register_signals(counters: Arc<SignalCounters>) -> io::Result<SignalRegistration> {
    let mut ids = Vec::with_capacity(2);
    for (raw, sig) in [(SIGUSR1, Sig::Usr1), (SIGUSR2, Sig::Usr2)] {
        let c = Arc::clone(&counters);
        // SAFETY: the handler performs a single atomic increment, which is
        // async-signal-safe; it neither allocates nor locks.
        let id = unsafe { signal_hook::low_level::register(raw, move || c.deliver(sig)) }?;
        ids.push(id);
    }
    Ok(SignalRegistration { ids, counters })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_signals_are_counted() {
        let reg = register_signals(Arc::new(SignalCounters::new())).unwrap();
        assert_eq!(reg.counters().pending(Sig::Usr2), 0);
        for _ in 0..3 {
            signal_hook::low_level::raise(SIGUSR2).unwrap();
        }
        assert_eq!(reg.counters().pending(Sig::Usr2), 3);
        assert_eq!(reg.counters().pending(Sig::Usr1), 0);
        signal_hook::low_level::raise(SIGUSR1).unwrap();
        assert!(reg.counters().take(Sig::Usr1));
        assert!(!reg.counters().take(Sig::Usr1));
    }
}
