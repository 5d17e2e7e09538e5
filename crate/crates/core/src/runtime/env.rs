//! The runtime support layer shared by the interpreter and generated
//! programs: predefined registers, the level machine with its scripts,
//! side-effecting actions and the outbound queue.

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use super::clock::{Clock, SystemClock};
use super::levels::{LevelMachine, LevelSpec, Transition};
use super::outcome::Outcome;
use super::process::{Invocation, InvocationKind, ProcessRunner, SystemRunner};
use super::signals::{Sig, SignalCounters};
use super::{Fault, Stop};
use crate::predicates::external::IdsConfig;
use crate::semantics::ScriptTable;

pub const DEFAULT_EXEC_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone)]
pub struct RuntimeConfig {
    /// Transition scripts; `None` disables them.
    pub scripts: Option<ScriptTable>,
    /// Limit for `exec` children, transition scripts and plugins.
    pub exec_timeout: Duration,
    pub ids: IdsConfig,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        Self {
            scripts: None,
            exec_timeout: DEFAULT_EXEC_TIMEOUT,
            ids: IdsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Snapshot {
    curr_level: i64,
    time: i64,
    uptime: i64,
}

#[derive(Debug)]
pub struct Runtime {
    machine: LevelMachine,
    cfg: RuntimeConfig,
    clock: Arc<dyn Clock>,
    runner: Arc<dyn ProcessRunner>,
    signals: Arc<SignalCounters>,
    outbox: Vec<Outcome>,
    start_ns: i64,
    snap: Snapshot,
    rule: &'static str,
    rule_owned: String,
}

impl Runtime {
    pub fn new(
        levels: Vec<LevelSpec>,
        cfg: RuntimeConfig,
        clock: Arc<dyn Clock>,
        runner: Arc<dyn ProcessRunner>,
        signals: Arc<SignalCounters>,
    ) -> Self {
        let start_ns = clock.now_ns();
        Self {
            machine: LevelMachine::new(levels),
            cfg,
            clock,
            runner,
            signals,
            outbox: Vec::new(),
            start_ns,
            snap: Snapshot::default(),
            rule: "",
            rule_owned: String::new(),
        }
    }

    /// Real clock, real processes, fresh signal counters.
    pub fn with_defaults(levels: Vec<LevelSpec>, cfg: RuntimeConfig) -> Self {
        Self::new(
            levels,
            cfg,
            Arc::new(SystemClock::new()),
            Arc::new(SystemRunner::new()),
            Arc::new(SignalCounters::new()),
        )
    }

    /// Enter the initial level: only its `.to` script runs.
    pub fn start(&mut self) {
        let Some(first) = self.machine.levels().first().map(|l| l.name.clone()) else {
            return;
        };
        if let Some(to) = self.script(0, true) {
            self.run_script(&to, "", &first);
        }
    }

    pub fn levels(&self) -> &LevelMachine {
        &self.machine
    }

    pub fn signals(&self) -> &Arc<SignalCounters> {
        &self.signals
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    pub fn now_ns(&self) -> i64 {
        self.clock.now_ns()
    }

    /// Refresh the predefined registers before evaluating a rule.
    #[inline]
    pub fn begin_rule(&mut self, id: &'static str) {
        self.rule = id;
        self.rule_owned.clear();
        self.refresh();
    }

    /// Like [`begin_rule`](Self::begin_rule) for ids not known statically.
    pub fn begin_rule_dyn(&mut self, id: &str) {
        self.rule = "";
        self.rule_owned.clear();
        self.rule_owned.push_str(id);
        self.refresh();
    }

    fn refresh(&mut self) {
        let now = self.clock.now_ns();
        self.snap = Snapshot {
            curr_level: self.machine.current() as i64,
            time: now,
            uptime: now.saturating_sub(self.start_ns),
        };
    }

    pub fn current_rule(&self) -> &str {
        if self.rule.is_empty() {
            &self.rule_owned
        } else {
            self.rule
        }
    }

    #[inline]
    pub fn curr_level(&self) -> i64 {
        self.snap.curr_level
    }

    #[inline]
    pub fn time(&self) -> i64 {
        self.snap.time
    }

    #[inline]
    pub fn uptime(&self) -> i64 {
        self.snap.uptime
    }

    /// `levelname`: empty when out of range.
    pub fn level_name(&self, ordinal: i64) -> String {
        self.machine.name(ordinal).unwrap_or_default().to_string()
    }

    /// Outcome of one rule: faults become diagnostic alerts, a crash
    /// propagates.
    #[inline]
    pub fn settle(&mut self, r: Result<(), Stop>) -> Result<(), Stop> {
        match r {
            Ok(()) => Ok(()),
            Err(Stop::Fault(f)) => {
                self.fault(f);
                Ok(())
            }
            Err(crash) => Err(crash),
        }
    }

    pub fn fault(&mut self, f: Fault) {
        let text = format!("rule {} skipped: {f}", self.current_rule());
        tracing::warn!("{text}");
        self.push_alert(text);
    }

    fn push_alert(&mut self, text: String) {
        let ts = self.clock.now_ns();
        self.outbox.push(Outcome::alert(text, ts));
    }

    pub fn alert(&mut self, text: String) -> bool {
        tracing::info!(rule = self.current_rule(), "alert: {text}");
        self.push_alert(text);
        true
    }

    /// Queue the crash message and return the stop signal. The caller
    /// flushes outcomes and terminates.
    pub fn crash(&mut self, text: String) -> Stop {
        tracing::error!(rule = self.current_rule(), "crash: {text}");
        self.push_alert(text.clone());
        Stop::Crash(text)
    }

    pub fn trigger(&mut self, target: i64) -> bool {
        match self.machine.plan(target) {
            Transition::Same => true,
            Transition::Rejected => {
                tracing::debug!(rule = self.current_rule(), target, "level transition rejected");
                false
            }
            Transition::Move { from, to } => {
                let from_name = self.machine.levels()[from].name.clone();
                let to_name = self.machine.levels()[to].name.clone();
                if let Some(p) = self.script(from, false) {
                    self.run_script(&p, &from_name, &to_name);
                }
                if let Some(p) = self.script(to, true) {
                    self.run_script(&p, &from_name, &to_name);
                }
                self.machine.commit(to);
                let ts = self.clock.now_ns();
                let gravity = self.machine.gravity(to);
                tracing::info!(rule = self.current_rule(), "level {from_name} -> {to_name}");
                self.outbox.push(Outcome::level_change(to_name, to, gravity, ts));
                true
            }
        }
    }

    fn script(&self, ordinal: usize, to: bool) -> Option<std::path::PathBuf> {
        let entry = self.cfg.scripts.as_ref()?.entries.get(ordinal)?;
        Some(if to { entry.to.clone() } else { entry.from.clone() })
    }

    fn run_script(&mut self, path: &Path, from: &str, to: &str) {
        let mut inv = Invocation::new(InvocationKind::Script, path.display().to_string());
        inv.env = vec![
            ("RIPS_LEVEL_FROM".to_string(), from.to_string()),
            ("RIPS_LEVEL_TO".to_string(), to.to_string()),
        ];
        let outcome = self.runner.run(&inv, self.cfg.exec_timeout);
        if !outcome.success() {
            self.push_alert(format!("transition script {} failed: {outcome}", path.display()));
        }
    }

    pub fn exec(&mut self, program: String, args: Vec<String>) -> bool {
        let mut inv = Invocation::new(InvocationKind::Exec, program);
        inv.args = args;
        let outcome = self.runner.run(&inv, self.cfg.exec_timeout);
        if !outcome.success() {
            tracing::info!(rule = self.current_rule(), "exec {inv}: {outcome}");
        }
        outcome.success()
    }

    /// `True(...)` / `False(...)`.
    pub fn debug(&mut self, result: bool, args: &[String]) -> bool {
        tracing::info!(rule = self.current_rule(), "{}", args.join(" "));
        result
    }

    pub fn idsalert(&self, needle: &str) -> bool {
        self.cfg.ids.idsalert(needle)
    }

    pub fn signal(&self, sig: Sig) -> bool {
        self.signals.take(sig)
    }

    pub fn plugin(&self, path: &Path, payload: &[u8]) -> bool {
        let mut inv = Invocation::new(InvocationKind::Plugin, path.display().to_string());
        inv.stdin = Some(payload.to_vec());
        self.runner.run(&inv, self.cfg.exec_timeout).success()
    }

    pub fn take_outcomes(&mut self) -> Vec<Outcome> {
        std::mem::take(&mut self.outbox)
    }

    pub fn pending_outcomes(&self) -> &[Outcome] {
        &self.outbox
    }
}
