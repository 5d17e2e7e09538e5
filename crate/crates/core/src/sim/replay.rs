//! Hosts an engine and a simulated monitor in one process, connected only
//! by the Unix-domain socket, and steps a frozen clock through a scenario
//! in lockstep with the engine loop.

use std::io::{Read, Write};
use std::os::unix::net::UnixStream;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use regex::Regex;

use super::report::{Observed, RunReport};
use super::scenario::{Action, Scenario};
use crate::predicates::{GraphContext, MessageContext};
use crate::runtime::engine::DEFAULT_TICK;
use crate::runtime::env::DEFAULT_EXEC_TIMEOUT;
use crate::runtime::{
    EngineConfig, Exit, LevelSpec, MainLoop, ManualClock, ProcessRunner, RuleEngine, Runtime, RuntimeConfig,
    SignalCounters, SystemRunner,
};
use crate::semantics::builtins::Builtin;
use crate::semantics::{CheckedProgram, ScriptTable, TExprKind};
use crate::syntax::ast::SectionKind;
use crate::wire::{decode_outcome, encode_event, FrameSplitter, InboundEvent, SocketServer};

/// Clock reading at scenario time zero: 2023-11-14T22:13:20Z.
pub const SIM_EPOCH_NS: i64 = 1_700_000_000_000_000_000;
pub const DEFAULT_POLLING: f64 = 0.5;
pub const DEFAULT_GRACE: f64 = 1.0;
/// Longest wait for the engine to finish one step.
const STEP_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TopicFilter {
    /// When set, only these topics are forwarded.
    pub whitelist: Option<Vec<String>>,
    pub blacklist: Vec<String>,
}

impl TopicFilter {
    /// Colon-separated topic lists; empty or missing lists are ignored.
    pub fn parse(white: Option<&str>, black: Option<&str>) -> Self {
        let split = |s: &str| -> Vec<String> { s.split(':').filter(|t| !t.is_empty()).map(String::from).collect() };
        Self {
            whitelist: white.map(split).filter(|v| !v.is_empty()),
            blacklist: black.map(split).unwrap_or_default(),
        }
    }

    /// From `RIPSWHITELIST` and `RIPSBLACKLIST`.
    pub fn from_env() -> Self {
        let w = std::env::var("RIPSWHITELIST").ok();
        let b = std::env::var("RIPSBLACKLIST").ok();
        Self::parse(w.as_deref(), b.as_deref())
    }

    pub fn allows(&self, topic: &str) -> bool {
        self.whitelist.as_ref().map_or(true, |w| w.iter().any(|t| t == topic)) && !self.blacklist.iter().any(|t| t == topic)
    }
}

/// `RIPSPOLLING` in seconds, if set.
pub fn polling_from_env() -> Result<Option<f64>, String> {
    match std::env::var("RIPSPOLLING") {
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(x) if x.is_finite() && x > 0.0 => Ok(Some(x)),
            _ => Err(format!("RIPSPOLLING must be a positive number of seconds, found {s:?}")),
        },
        Err(_) => Ok(None),
    }
}

/// Topics the Msg rules of a program can react to.
#[derive(Debug, Clone)]
pub enum TopicInterest {
    All,
    Some { names: Vec<String>, patterns: Vec<Regex> },
}

impl TopicInterest {
    /// Topics named by `topicin` literals and `topicmatches` patterns. A Msg
    /// rule that constrains neither reacts to every topic.
    pub fn from_program(p: &CheckedProgram) -> Self {
        let mut names = Vec::new();
        let mut patterns = Vec::new();
        for rule in p.rules_of(SectionKind::Msg) {
            let mut constrained = false;
            rule.trigger.walk(&mut |e| match &e.kind {
                TExprKind::Call(Builtin::TopicIn, args) => {
                    for a in args {
                        if let TExprKind::Lit(v) = &a.kind {
                            if let Some(s) = v.as_str() {
                                names.push(s.to_string());
                                constrained = true;
                            }
                        }
                    }
                }
                TExprKind::TopicMatches(i) => {
                    patterns.push(p.regexes[*i].regex.clone());
                    constrained = true;
                }
                _ => {}
            });
            if !constrained {
                return TopicInterest::All;
            }
        }
        TopicInterest::Some { names, patterns }
    }

    pub fn allows(&self, topic: &str) -> bool {
        match self {
            TopicInterest::All => true,
            TopicInterest::Some { names, patterns } => {
                names.iter().any(|n| n == topic) || patterns.iter().any(|r| r.is_match(topic))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    /// Polling interval in seconds; overrides the scenario.
    pub polling: Option<f64>,
    /// Grace period in seconds; overrides the scenario.
    pub grace: Option<f64>,
    /// Emit graph events only when the graph changed since the last one.
    pub on_change_only: bool,
    /// Hold graph changes until the next poll instead of emitting at once.
    pub detect_at_poll: bool,
    pub filter: TopicFilter,
    /// Set for `--subscribe-minimal`.
    pub interest: Option<TopicInterest>,
    pub tick: Duration,
    pub scripts: Option<ScriptTable>,
    pub runner: Arc<dyn ProcessRunner>,
    pub exec_timeout: Duration,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            polling: None,
            grace: None,
            on_change_only: false,
            detect_at_poll: false,
            filter: TopicFilter::default(),
            interest: None,
            tick: DEFAULT_TICK,
            scripts: None,
            runner: Arc::new(SystemRunner::quiet()),
            exec_timeout: DEFAULT_EXEC_TIMEOUT,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("cannot set up the simulated monitor: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
}

fn secs_to_ns(s: f64) -> i64 {
    (s * 1e9).round() as i64
}

fn ns_to_secs(ns: i64) -> f64 {
    ns as f64 / 1e9
}

static SOCKET_SEQ: AtomicU64 = AtomicU64::new(0);

fn temp_socket() -> PathBuf {
    let n = SOCKET_SEQ.fetch_add(1, Ordering::Relaxed);
    std::env::temp_dir().join(format!("rips-sim-{}-{n}.sock", std::process::id()))
}

type EngineThread<E> = JoinHandle<(Exit, MainLoop<E>)>;

/// The monitor's side of the socket: events out, outcomes in.
struct Monitor {
    stream: UnixStream,
    reader: Option<JoinHandle<()>>,
    received: Arc<Mutex<Vec<String>>>,
    sent: u64,
}

impl Monitor {
    fn connect(server: &SocketServer) -> Result<Self, SimError> {
        let stream = UnixStream::connect(server.path())?;
        let deadline = Instant::now() + STEP_TIMEOUT;
        while !server.is_connected() {
            if Instant::now() > deadline {
                return Err(SimError::Invalid("engine did not accept the monitor connection".to_string()));
            }
            thread::sleep(Duration::from_micros(200));
        }
        let received = Arc::new(Mutex::new(Vec::new()));
        let mut read_half = stream.try_clone()?;
        let sink = Arc::clone(&received);
        let reader = thread::spawn(move || {
            let mut split = FrameSplitter::new();
            let mut buf = [0u8; 8192];
            loop {
                match read_half.read(&mut buf) {
                    Ok(0) | Err(_) => break,
                    Ok(n) => {
                        let docs: Vec<String> = split.push(&buf[..n]).into_iter().filter_map(Result::ok).collect();
                        sink.lock().expect("outcome buffer poisoned").extend(docs);
                    }
                }
            }
        });
        Ok(Self {
            stream,
            reader: Some(reader),
            received,
            sent: 0,
        })
    }

    fn send(&mut self, ev: &InboundEvent) -> bool {
        let ok = self.stream.write_all(encode_event(ev).as_bytes()).is_ok();
        if ok {
            self.sent += 1;
        }
        ok
    }

    /// Wait for the engine to close the connection and return every
    /// outcome document it sent.
    fn finish(mut self) -> Vec<String> {
        let _ = self.stream.shutdown(std::net::Shutdown::Write);
        if let Some(r) = self.reader.take() {
            let _ = r.join();
        }
        std::mem::take(&mut *self.received.lock().expect("outcome buffer poisoned"))
    }
}

struct Lockstep<E> {
    clock: Arc<ManualClock>,
    progress: Arc<crate::runtime::Progress>,
    handle: EngineThread<E>,
}

impl<E> Lockstep<E> {
    /// Wait until `done` holds; fails when the engine loop has exited first.
    fn wait(&self, what: &str, done: impl Fn() -> bool) -> Result<(), String> {
        let deadline = Instant::now() + STEP_TIMEOUT;
        loop {
            if done() {
                return Ok(());
            }
            if self.handle.is_finished() {
                return Err(format!("engine stopped while waiting for {what}"));
            }
            if Instant::now() > deadline {
                return Err(format!("timed out waiting for {what}"));
            }
            thread::sleep(Duration::from_micros(100));
        }
    }

    fn advance_to(&self, now: i64) -> Result<(), String> {
        self.clock.set(now);
        self.wait("the engine clock", || self.progress.caught_up_to() >= now)
    }
}

/// Run a scenario against an engine and report what it emitted.
pub fn simulate<E: RuleEngine + 'static>(
    engine: E,
    levels: Vec<LevelSpec>,
    scn: &Scenario,
    opts: &SimOptions,
) -> Result<RunReport, SimError> {
    let polling = opts.polling.or(scn.polling).unwrap_or(DEFAULT_POLLING);
    let grace = opts.grace.or(scn.grace).unwrap_or(DEFAULT_GRACE);
    if !(polling.is_finite() && polling > 0.0) || !(grace.is_finite() && grace >= 0.0) {
        return Err(SimError::Invalid(format!("invalid polling {polling} or grace {grace}")));
    }
    let poll_ns = secs_to_ns(polling).max(1);
    let tick_ns = i64::try_from(opts.tick.as_nanos()).unwrap_or(i64::MAX).max(1);
    let horizon = secs_to_ns(scn.end() + grace);

    let clock = Arc::new(ManualClock::new(SIM_EPOCH_NS));
    let signals = Arc::new(SignalCounters::new());
    let rt = Runtime::new(
        levels,
        RuntimeConfig {
            scripts: opts.scripts.clone(),
            exec_timeout: opts.exec_timeout,
            ..RuntimeConfig::default()
        },
        clock.clone(),
        Arc::clone(&opts.runner),
        Arc::clone(&signals),
    );
    let path = temp_socket();
    let (mut server, rx) = SocketServer::bind(&path)?;
    let mut monitor = Monitor::connect(&server)?;
    let stop = Arc::new(AtomicBool::new(false));
    let mut main = MainLoop::new(
        engine,
        rt,
        EngineConfig {
            tick: opts.tick,
            ..EngineConfig::default()
        },
    )
    .with_stop(Arc::clone(&stop));
    let progress = main.progress();
    let mut sink = server.sink();
    let handle = thread::spawn(move || {
        let exit = main.run(&rx, &mut sink);
        (exit, main)
    });
    let step = Lockstep {
        clock: Arc::clone(&clock),
        progress: Arc::clone(&progress),
        handle,
    };

    let mut graph = scn.graph.clone();
    let mut dirty = true;
    let mut next_entry = 0;
    let mut next_poll = 0i64;
    let mut next_tick = 0i64;
    let mut aborted = None;
    loop {
        let entry_at = scn.timeline.get(next_entry).map(|e| secs_to_ns(e.at));
        let now = [Some(next_poll), Some(next_tick), entry_at].into_iter().flatten().min().unwrap_or(i64::MAX);
        if now > horizon {
            break;
        }
        if let Err(e) = step.advance_to(SIM_EPOCH_NS + now) {
            aborted = Some(e);
            break;
        }
        let mut delivered = true;
        while let Some(e) = scn.timeline.get(next_entry).filter(|e| secs_to_ns(e.at) == now) {
            next_entry += 1;
            match &e.action {
                Action::Signal(sig) => signals.deliver(*sig),
                Action::Message {
                    topic,
                    msg_type,
                    payload,
                } => {
                    let wanted = opts.filter.allows(topic) && opts.interest.as_ref().map_or(true, |i| i.allows(topic));
                    if wanted {
                        delivered &= monitor.send(&InboundEvent::message(MessageContext {
                            topic: topic.clone(),
                            msg_type: msg_type.clone(),
                            payload: payload.clone(),
                            graph: graph.clone(),
                        }));
                    }
                }
                edit => {
                    edit.apply(&mut graph);
                    dirty = true;
                    if !opts.detect_at_poll {
                        delivered &= monitor.send(&InboundEvent::graph(graph.clone()));
                        dirty = false;
                    }
                }
            }
        }
        if now == next_poll {
            if dirty || !opts.on_change_only {
                delivered &= monitor.send(&InboundEvent::graph(graph.clone()));
                dirty = false;
            }
            next_poll += poll_ns;
        }
        if now == next_tick {
            next_tick += tick_ns;
        }
        if !delivered {
            aborted = Some("engine closed the connection".to_string());
            break;
        }
        let sent = monitor.sent;
        if let Err(e) = step.wait("event handling", || progress.events_handled() >= sent) {
            aborted = Some(e);
            break;
        }
    }

    stop.store(true, Ordering::Relaxed);
    let (exit, main) = step
        .handle
        .join()
        .map_err(|_| SimError::Invalid("engine thread panicked".to_string()))?;
    server.shutdown();
    drop(server);
    let events_sent = monitor.sent;
    let docs = monitor.finish();
    let observed = docs
        .iter()
        .filter_map(|d| decode_outcome(d).ok())
        .map(|o| Observed {
            t: ns_to_secs(o.timestamp - SIM_EPOCH_NS),
            outcome: o,
        })
        .collect();
    let mut report = RunReport::evaluate(scn, polling, events_sent, observed);
    match exit {
        Exit::Crash(msg) => report.crashed = Some(msg),
        Exit::SourceClosed if aborted.is_none() => aborted = Some("event source closed".to_string()),
        _ => {}
    }
    if report.crashed.is_none() {
        report.aborted = aborted;
    }
    report.vars = main.engine().dump_vars();
    Ok(report)
}

/// Graph reached by applying every graph edit of the timeline.
pub fn final_graph(scn: &Scenario) -> GraphContext {
    let mut g = scn.graph.clone();
    for e in &scn.timeline {
        e.action.apply(&mut g);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topic_filter_lists() {
        let f = TopicFilter::parse(Some("/commands:/other"), Some("/rosout"));
        assert!(f.allows("/commands"));
        assert!(!f.allows("/scan"));
        let f = TopicFilter::parse(Some(""), Some("/rosout::/parameter_events"));
        assert!(f.whitelist.is_none());
        assert!(!f.allows("/rosout"));
        assert!(!f.allows("/parameter_events"));
        assert!(f.allows("/commands"));
    }
}
