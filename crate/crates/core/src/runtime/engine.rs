//! The event loop shared by interpreted and generated engines.

use std::sync::atomic::{AtomicBool, AtomicI64, AtomicU64, Ordering};
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::sync::Arc;
use std::time::Duration;

use super::clock::duration_ns;
use super::env::Runtime;
use super::outcome::Outcome;
use super::Stop;
use crate::predicates::{GraphContext, MessageContext};
use crate::wire::{EventKind, InboundEvent};

/// A compiled rule set: the interpreter or a generated program.
pub trait RuleEngine: Send {
    /// Run every `Graph` rule in declaration order.
    fn on_graph(&mut self, rt: &mut Runtime, g: &GraphContext) -> Result<(), Stop>;
    /// Run every `Msg` rule in declaration order.
    fn on_message(&mut self, rt: &mut Runtime, m: &MessageContext) -> Result<(), Stop>;
    /// Run every `External` rule in declaration order.
    fn on_tick(&mut self, rt: &mut Runtime) -> Result<(), Stop>;
    /// Variable names and their values in declaration order.
    fn dump_vars(&self) -> Vec<(String, String)>;
}

impl<E: RuleEngine + ?Sized> RuleEngine for Box<E> {
    fn on_graph(&mut self, rt: &mut Runtime, g: &GraphContext) -> Result<(), Stop> {
        (**self).on_graph(rt, g)
    }

    fn on_message(&mut self, rt: &mut Runtime, m: &MessageContext) -> Result<(), Stop> {
        (**self).on_message(rt, m)
    }

    fn on_tick(&mut self, rt: &mut Runtime) -> Result<(), Stop> {
        (**self).on_tick(rt)
    }

    fn dump_vars(&self) -> Vec<(String, String)> {
        (**self).dump_vars()
    }
}

pub const DEFAULT_TICK: Duration = Duration::from_millis(100);

/// Longest blocking wait when time is virtual and may jump at any moment.
const VIRTUAL_POLL: Duration = Duration::from_millis(5);
/// Longest blocking wait between checks of the stop flag.
const STOP_POLL: Duration = Duration::from_millis(50);

#[derive(Debug, Clone, Copy)]
pub struct EngineConfig {
    /// Interval between evaluations of `External` rules.
    pub tick: Duration,
    /// Ticks run back to back after a stall before the schedule skips ahead.
    pub max_catch_up: u32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            tick: DEFAULT_TICK,
            max_catch_up: 10,
        }
    }
}

/// What the event source delivers to the loop.
#[derive(Debug)]
pub enum Inbound {
    Event(Box<InboundEvent>),
    /// A document that failed to decode; logged and skipped.
    Malformed(String),
}

/// Where outcomes go. Returns false when delivery failed.
pub trait OutcomeSink {
    fn emit(&mut self, o: &Outcome) -> bool;
}

impl OutcomeSink for Vec<Outcome> {
    fn emit(&mut self, o: &Outcome) -> bool {
        self.push(o.clone());
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exit {
    SourceClosed,
    /// The stop flag was raised.
    Stopped,
    Crash(String),
}

/// Loop progress observable from other threads, used by the simulator to
/// step virtual time in lockstep with the engine.
#[derive(Debug, Default)]
pub struct Progress {
    events_handled: AtomicU64,
    caught_up_to: AtomicI64,
}

impl Progress {
    /// Inbound documents consumed, decoded or not.
    pub fn events_handled(&self) -> u64 {
        self.events_handled.load(Ordering::Acquire)
    }

    /// Clock reading up to which all due ticks have run.
    pub fn caught_up_to(&self) -> i64 {
        self.caught_up_to.load(Ordering::Acquire)
    }
}

pub struct MainLoop<E> {
    engine: E,
    rt: Runtime,
    cfg: EngineConfig,
    progress: Arc<Progress>,
    next_tick: i64,
    stop: Option<Arc<AtomicBool>>,
}

impl<E: RuleEngine> MainLoop<E> {
    pub fn new(engine: E, rt: Runtime, cfg: EngineConfig) -> Self {
        Self {
            engine,
            rt,
            cfg,
            progress: Arc::new(Progress {
                caught_up_to: AtomicI64::new(i64::MIN),
                ..Progress::default()
            }),
            next_tick: i64::MAX,
            stop: None,
        }
    }

    /// Leave the loop soon after `flag` becomes true.
    pub fn with_stop(mut self, flag: Arc<AtomicBool>) -> Self {
        self.stop = Some(flag);
        self
    }

    pub fn progress(&self) -> Arc<Progress> {
        Arc::clone(&self.progress)
    }

    pub fn engine(&self) -> &E {
        &self.engine
    }

    pub fn runtime(&self) -> &Runtime {
        &self.rt
    }

    /// Dispatch one event to the matching section.
    pub fn handle(&mut self, ev: &InboundEvent) -> Result<(), Stop> {
        match &ev.kind {
            EventKind::Graph(g) => self.engine.on_graph(&mut self.rt, g),
            EventKind::Message(m) => self.engine.on_message(&mut self.rt, m),
        }
    }

    pub fn tick(&mut self) -> Result<(), Stop> {
        self.engine.on_tick(&mut self.rt)
    }

    fn flush(&mut self, sink: &mut dyn OutcomeSink) {
        for o in self.rt.take_outcomes() {
            if !sink.emit(&o) {
                tracing::warn!("outcome not delivered: {o:?}");
            }
        }
    }

    fn run_due_ticks(&mut self, now: i64) -> Result<(), Stop> {
        let tick = duration_ns(self.cfg.tick).max(1);
        let mut ran = 0;
        while now >= self.next_tick {
            if ran == self.cfg.max_catch_up {
                let skipped = (now - self.next_tick) / tick + 1;
                tracing::warn!(skipped, "external rules fell behind; skipping ticks");
                self.next_tick += skipped * tick;
                break;
            }
            self.tick()?;
            ran += 1;
            self.next_tick += tick;
        }
        Ok(())
    }

    /// Run until the source closes or a rule crashes. Outcomes are flushed
    /// to `sink` after every event and tick, crash messages included.
    pub fn run(&mut self, rx: &Receiver<Inbound>, sink: &mut dyn OutcomeSink) -> Exit {
        self.rt.start();
        let tick = duration_ns(self.cfg.tick).max(1);
        self.next_tick = self.rt.now_ns().saturating_add(tick);
        self.flush(sink);
        let is_virtual = self.rt.clock().is_virtual();
        loop {
            if self.stop.as_ref().is_some_and(|f| f.load(Ordering::Relaxed)) {
                return Exit::Stopped;
            }
            let now = self.rt.now_ns();
            let r = self.run_due_ticks(now);
            self.flush(sink);
            if let Err(Stop::Crash(msg)) = r {
                return Exit::Crash(msg);
            }
            self.progress.caught_up_to.fetch_max(now, Ordering::AcqRel);
            let mut wait = Duration::from_nanos(self.next_tick.saturating_sub(now).max(0) as u64);
            if is_virtual || self.stop.is_some() {
                wait = wait.min(if is_virtual { VIRTUAL_POLL } else { STOP_POLL });
            }
            let item = match rx.recv_timeout(wait) {
                Ok(item) => item,
                Err(RecvTimeoutError::Timeout) => continue,
                Err(RecvTimeoutError::Disconnected) => return Exit::SourceClosed,
            };
            let r = match item {
                Inbound::Event(ev) => {
                    let now = self.rt.now_ns();
                    match self.run_due_ticks(now) {
                        Ok(()) => self.handle(&ev),
                        Err(e) => Err(e),
                    }
                }
                Inbound::Malformed(why) => {
                    tracing::warn!("skipping malformed event: {why}");
                    Ok(())
                }
            };
            self.flush(sink);
            self.progress.events_handled.fetch_add(1, Ordering::AcqRel);
            if let Err(Stop::Crash(msg)) = r {
                return Exit::Crash(msg);
            }
        }
    }

    pub fn into_parts(self) -> (E, Runtime) {
        (self.engine, self.rt)
    }
}
