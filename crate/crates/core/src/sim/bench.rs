//! Corpus replay with separate timing of decoding, rule execution and
//! encoding.

use std::fmt::Write as _;
use std::hint::black_box;
use std::io;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::runtime::{DryRunner, LevelSpec, RuleEngine, Runtime, RuntimeConfig, SignalCounters, Stop, SystemClock};
use crate::wire::{decode_event, encode_event, encode_outcome, EventKind, FrameSplitter, InboundEvent};

/// Split a recorded corpus file into its YAML documents.
pub fn read_corpus(path: &Path) -> io::Result<Vec<String>> {
    let bytes = std::fs::read(path)?;
    Ok(split_corpus(&bytes))
}

pub fn split_corpus(bytes: &[u8]) -> Vec<String> {
    let mut s = FrameSplitter::new();
    let mut docs: Vec<String> = s.push(bytes).into_iter().filter_map(Result::ok).collect();
    // A final document without a trailing newline or end marker.
    docs.extend(s.push(b"\n...\n").into_iter().filter_map(Result::ok));
    docs
}

pub fn write_corpus(events: &[InboundEvent]) -> String {
    events.iter().map(encode_event).collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timings {
    pub events: usize,
    pub malformed: usize,
    pub outcomes: usize,
    pub decode: Duration,
    pub exec: Duration,
    pub encode: Duration,
    /// Set when a `crash` action ended the replay early.
    pub crashed: Option<String>,
}

impl Timings {
    pub fn codec(&self) -> Duration {
        self.decode + self.encode
    }

    pub fn total(&self) -> Duration {
        self.decode + self.exec + self.encode
    }

    pub fn to_yaml(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "events: {}", self.events);
        let _ = writeln!(s, "malformed: {}", self.malformed);
        let _ = writeln!(s, "outcomes: {}", self.outcomes);
        let _ = writeln!(s, "decode_ns: {}", self.decode.as_nanos());
        let _ = writeln!(s, "exec_ns: {}", self.exec.as_nanos());
        let _ = writeln!(s, "encode_ns: {}", self.encode.as_nanos());
        if let Some(c) = &self.crashed {
            let _ = writeln!(s, "crashed: {c:?}");
        }
        s
    }

    /// Parse the output of [`to_yaml`](Self::to_yaml).
    pub fn from_yaml(text: &str) -> Option<Self> {
        let mut t = Timings::default();
        for line in text.lines() {
            let (k, v) = line.split_once(": ")?;
            match k {
                "events" => t.events = v.parse().ok()?,
                "malformed" => t.malformed = v.parse().ok()?,
                "outcomes" => t.outcomes = v.parse().ok()?,
                "decode_ns" => t.decode = Duration::from_nanos(v.parse().ok()?),
                "exec_ns" => t.exec = Duration::from_nanos(v.parse().ok()?),
                "encode_ns" => t.encode = Duration::from_nanos(v.parse().ok()?),
                "crashed" => t.crashed = Some(v.trim_matches('"').to_string()),
                _ => {}
            }
        }
        Some(t)
    }

    /// Keep the faster measurement of each phase.
    pub fn min(self, other: Self) -> Self {
        Self {
            decode: self.decode.min(other.decode),
            exec: self.exec.min(other.exec),
            encode: self.encode.min(other.encode),
            ..self
        }
    }
}

/// A runtime for timing: real clock, no child processes, no scripts.
pub fn bench_runtime(levels: Vec<LevelSpec>) -> Runtime {
    Runtime::new(
        levels,
        RuntimeConfig::default(),
        Arc::new(SystemClock::new()),
        Arc::new(DryRunner),
        Arc::new(SignalCounters::new()),
    )
}

/// Replay documents the way the engine process handles them: decode,
/// evaluate, encode the outcomes.
pub fn replay_docs<E: RuleEngine + ?Sized>(engine: &mut E, levels: Vec<LevelSpec>, docs: &[String]) -> Timings {
    let mut rt = bench_runtime(levels);
    rt.start();
    let mut t = Timings::default();
    for doc in docs {
        let start = Instant::now();
        let ev = decode_event(doc);
        let decoded = Instant::now();
        t.decode += decoded - start;
        let Ok(ev) = ev else {
            t.malformed += 1;
            continue;
        };
        t.events += 1;
        let r = dispatch(engine, &mut rt, &ev);
        let ran = Instant::now();
        t.exec += ran - decoded;
        let mut bytes = 0;
        for o in rt.take_outcomes() {
            bytes += black_box(encode_outcome(&o)).len();
            t.outcomes += 1;
        }
        black_box(bytes);
        t.encode += ran.elapsed();
        if let Err(Stop::Crash(msg)) = r {
            t.crashed = Some(msg);
            break;
        }
    }
    t
}

/// Rule execution time alone over pre-decoded events.
pub fn replay_events<E: RuleEngine + ?Sized>(engine: &mut E, rt: &mut Runtime, events: &[InboundEvent]) -> Duration {
    let start = Instant::now();
    for ev in events {
        if let Err(Stop::Crash(_)) = dispatch(engine, rt, ev) {
            break;
        }
        black_box(rt.take_outcomes());
    }
    start.elapsed()
}

fn dispatch<E: RuleEngine + ?Sized>(engine: &mut E, rt: &mut Runtime, ev: &InboundEvent) -> Result<(), Stop> {
    match &ev.kind {
        EventKind::Graph(g) => engine.on_graph(rt, g),
        EventKind::Message(m) => engine.on_message(rt, m),
    }
}

/// Interpreted and generated timings of one corpus.
#[derive(Debug, Clone)]
pub struct BenchReport {
    pub interpreted: Timings,
    pub generated: Timings,
}

impl BenchReport {
    /// Interpreted over generated rule-execution time; `None` when there
    /// is nothing to compare.
    pub fn speedup(&self) -> Option<f64> {
        let g = self.generated.exec.as_secs_f64();
        if self.interpreted.events == 0 || g <= 0.0 {
            None
        } else {
            Some(self.interpreted.exec.as_secs_f64() / g)
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "events: {}", self.interpreted.events);
        for (name, t) in [("interpreted", &self.interpreted), ("generated", &self.generated)] {
            let _ = writeln!(s, "{name}:");
            let _ = writeln!(s, "  decode: {}", micros(t.decode));
            let _ = writeln!(s, "  rules: {}", micros(t.exec));
            let _ = writeln!(s, "  encode: {}", micros(t.encode));
            let _ = writeln!(s, "  total: {}", micros(t.total()));
            let share = if t.total().is_zero() {
                "n/a".to_string()
            } else {
                format!("{:.1}%", 100.0 * t.codec().as_secs_f64() / t.total().as_secs_f64())
            };
            let _ = writeln!(s, "  decode+encode share: {share}");
        }
        let _ = match self.speedup() {
            Some(x) => writeln!(s, "speedup (rules): {x:.2}x"),
            None => writeln!(s, "speedup (rules): n/a"),
        };
        s
    }
}

fn micros(d: Duration) -> String {
    format!("{:.0} us", d.as_secs_f64() * 1e6)
}
