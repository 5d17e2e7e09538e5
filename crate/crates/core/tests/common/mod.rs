//! Shared fixtures: an interpreter wired to a frozen clock and a recording
//! process runner.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rips_core::runtime::{ManualClock, RecordingRunner, RuntimeConfig, SignalCounters};
use rips_core::semantics::{compile, CheckedProgram, CompileOptions};
use rips_core::sim::SIM_EPOCH_NS;
use rips_core::{GraphContext, Interpreter, MessageContext, Node, Outcome, OutcomeKind, RuleEngine, Runtime, Topic};

pub fn rules_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../rules")
}

pub fn listing(name: &str) -> String {
    std::fs::read_to_string(rules_dir().join(name)).unwrap()
}

pub fn checked(source: &str) -> CheckedProgram {
    compile(source, &CompileOptions::new("t.rul").with_base_dir(rules_dir())).unwrap_or_else(|e| panic!("{e}"))
}

pub struct Harness {
    pub engine: Interpreter,
    pub rt: Runtime,
    pub runner: Arc<RecordingRunner>,
    pub clock: Arc<ManualClock>,
    pub signals: Arc<SignalCounters>,
}

impl Harness {
    pub fn new(source: &str) -> Self {
        Self::with(source, RecordingRunner::new(), RuntimeConfig::default())
    }

    pub fn with(source: &str, runner: RecordingRunner, cfg: RuntimeConfig) -> Self {
        let prog = Arc::new(checked(source));
        let runner = Arc::new(runner);
        let clock = Arc::new(ManualClock::new(SIM_EPOCH_NS));
        let signals = Arc::new(SignalCounters::new());
        let mut rt = Runtime::new(
            prog.levels.clone(),
            cfg,
            clock.clone(),
            runner.clone(),
            signals.clone(),
        );
        rt.start();
        Self {
            engine: Interpreter::new(prog),
            rt,
            runner,
            clock,
            signals,
        }
    }

    pub fn graph(&mut self, g: &GraphContext) -> Vec<Outcome> {
        self.engine.on_graph(&mut self.rt, g).expect("no crash");
        self.rt.take_outcomes()
    }

    pub fn message(&mut self, m: &MessageContext) -> Vec<Outcome> {
        self.engine.on_message(&mut self.rt, m).expect("no crash");
        self.rt.take_outcomes()
    }

    pub fn tick(&mut self) -> Vec<Outcome> {
        self.engine.on_tick(&mut self.rt).expect("no crash");
        self.rt.take_outcomes()
    }

    pub fn var(&self, name: &str) -> String {
        self.engine
            .dump_vars()
            .into_iter()
            .find(|(k, _)| k == name)
            .unwrap_or_else(|| panic!("no variable {name}"))
            .1
    }

    pub fn level(&self) -> String {
        self.rt.levels().current_name().unwrap_or_default().to_string()
    }
}

/// Outcomes as short strings: `level:NAME` or `alert:TEXT`.
pub fn brief(outcomes: &[Outcome]) -> Vec<String> {
    outcomes
        .iter()
        .map(|o| match &o.kind {
            OutcomeKind::LevelChange { level, .. } => format!("level:{level}"),
            OutcomeKind::Alert { text } => format!("alert:{text}"),
        })
        .collect()
}

pub fn graph_with_nodes(n: usize) -> GraphContext {
    GraphContext {
        nodes: (0..n).map(|i| Node::new(format!("n{i}"))).collect(),
        topics: Vec::new(),
    }
}

pub fn message(topic: &str, payload: &[u8]) -> MessageContext {
    MessageContext {
        topic: topic.to_string(),
        msg_type: "std_msgs/msg/String".to_string(),
        payload: payload.to_vec(),
        graph: GraphContext {
            nodes: vec![Node::new("talker")],
            topics: vec![Topic::new(topic).with_publishers(["talker"])],
        },
    }
}
