//! Deterministic execution of a step sequence, for comparing the
//! interpreter with generated programs.

use std::sync::Arc;

use super::replay::SIM_EPOCH_NS;
use crate::gen::Step;
use crate::runtime::process::Invocation;
use crate::runtime::{LevelSpec, ManualClock, RecordingRunner, RuleEngine, Runtime, RuntimeConfig, SignalCounters, Stop};
use crate::wire::{encode_outcome, EventKind};

/// Everything observable from one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    /// Outcomes as encoded on the wire.
    pub outcomes: Vec<String>,
    pub invocations: Vec<Invocation>,
    pub vars: Vec<(String, String)>,
    pub crashed: Option<String>,
}

/// Run `steps` under a frozen clock with every child process recorded
/// and reported successful.
pub fn run_steps<E: RuleEngine + ?Sized>(engine: &mut E, levels: Vec<LevelSpec>, steps: &[Step]) -> Transcript {
    let clock = Arc::new(ManualClock::new(SIM_EPOCH_NS));
    let runner = Arc::new(RecordingRunner::new());
    let signals = Arc::new(SignalCounters::new());
    let mut rt = Runtime::new(
        levels,
        RuntimeConfig::default(),
        clock.clone(),
        runner.clone(),
        Arc::clone(&signals),
    );
    rt.start();
    let mut outcomes = Vec::new();
    let mut crashed = None;
    for step in steps {
        let r = match step {
            Step::Event(ev) => match &ev.kind {
                EventKind::Graph(g) => engine.on_graph(&mut rt, g),
                EventKind::Message(m) => engine.on_message(&mut rt, m),
            },
            Step::Tick => engine.on_tick(&mut rt),
            Step::Signal(s) => {
                signals.deliver(*s);
                Ok(())
            }
            Step::Advance(ns) => {
                clock.set(clock_now(&rt) + ns);
                Ok(())
            }
        };
        outcomes.extend(rt.take_outcomes().iter().map(encode_outcome));
        if let Err(Stop::Crash(msg)) = r {
            crashed = Some(msg);
            break;
        }
    }
    Transcript {
        outcomes,
        invocations: runner.invocations(),
        vars: engine.dump_vars(),
        crashed,
    }
}

fn clock_now(rt: &Runtime) -> i64 {
    rt.clock().now_ns()
}

/// First difference between two transcripts, for failure messages.
pub fn first_difference(a: &Transcript, b: &Transcript) -> Option<String> {
    if let Some(i) = (0..a.outcomes.len().max(b.outcomes.len())).find(|&i| a.outcomes.get(i) != b.outcomes.get(i)) {
        return Some(format!(
            "outcome {i}: {:?} vs {:?}",
            a.outcomes.get(i),
            b.outcomes.get(i)
        ));
    }
    if a.invocations != b.invocations {
        return Some(format!("invocations: {:?} vs {:?}", a.invocations, b.invocations));
    }
    if a.vars != b.vars {
        return Some(format!("vars: {:?} vs {:?}", a.vars, b.vars));
    }
    if a.crashed != b.crashed {
        return Some(format!("crash: {:?} vs {:?}", a.crashed, b.crashed));
    }
    None
}
