//! Child-process execution for `exec`, transition scripts and plugins.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::process::{Command, Stdio};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use wait_timeout::ChildExt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InvocationKind {
    Exec,
    Script,
    Plugin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub kind: InvocationKind,
    pub program: String,
    pub args: Vec<String>,
    /// Extra environment variables on top of the inherited environment.
    pub env: Vec<(String, String)>,
    pub stdin: Option<Vec<u8>>,
}

impl Invocation {
    pub fn new(kind: InvocationKind, program: impl Into<String>) -> Self {
        Self {
            kind,
            program: program.into(),
            args: Vec::new(),
            env: Vec::new(),
            stdin: None,
        }
    }
}

impl fmt::Display for Invocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.program)?;
        for a in &self.args {
            write!(f, " {a:?}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    Exited(i32),
    /// Terminated by a signal.
    Killed,
    SpawnFailed(String),
    TimedOut,
}

impl RunOutcome {
    pub fn success(&self) -> bool {
        matches!(self, RunOutcome::Exited(0))
    }
}

impl fmt::Display for RunOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunOutcome::Exited(c) => write!(f, "exit status {c}"),
            RunOutcome::Killed => f.write_str("killed by a signal"),
            RunOutcome::SpawnFailed(e) => write!(f, "could not start: {e}"),
            RunOutcome::TimedOut => f.write_str("timed out"),
        }
    }
}

pub trait ProcessRunner: Send + Sync + fmt::Debug {
    /// Run to completion, killing the child after `timeout`.
    fn run(&self, inv: &Invocation, timeout: Duration) -> RunOutcome;
}

/// Spawns real processes.
#[derive(Debug, Clone, Default)]
pub struct SystemRunner {
    /// Discard the children's standard output and error.
    pub quiet: bool,
}

impl SystemRunner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn quiet() -> Self {
        Self { quiet: true }
    }
}

impl ProcessRunner for SystemRunner {
    fn run(&self, inv: &Invocation, timeout: Duration) -> RunOutcome {
        let mut cmd = Command::new(&inv.program);
        cmd.args(&inv.args)
            .envs(inv.env.iter().map(|(k, v)| (k, v)))
            .stdin(if inv.stdin.is_some() { Stdio::piped() } else { Stdio::null() });
        if self.quiet {
            cmd.stdout(Stdio::null()).stderr(Stdio::null());
        }
        let mut child = match cmd.spawn() {
            Ok(c) => c,
            Err(e) => return RunOutcome::SpawnFailed(e.to_string()),
        };
        // Feed stdin from a separate thread so a child that never reads
        // cannot block us past the timeout.
        let feeder = match (child.stdin.take(), &inv.stdin) {
            (Some(mut pipe), Some(data)) => {
                let data = data.clone();
                Some(std::thread::spawn(move || {
                    // A child that exits without reading closes the pipe;
                    // that is its decision, not an error.
                    let _ = pipe.write_all(&data);
                }))
            }
            _ => None,
        };
        let outcome = match child.wait_timeout(timeout) {
            Ok(Some(status)) => status.code().map_or(RunOutcome::Killed, RunOutcome::Exited),
            Ok(None) => {
                let _ = child.kill();
                let _ = child.wait();
                RunOutcome::TimedOut
            }
            Err(e) => RunOutcome::SpawnFailed(e.to_string()),
        };
        if let Some(h) = feeder {
            let _ = h.join();
        }
        outcome
    }
}

/// Spawns nothing: every invocation succeeds immediately. Used when
/// timing rule execution, where child processes would dominate.
#[derive(Debug, Clone, Copy, Default)]
pub struct DryRunner;

impl ProcessRunner for DryRunner {
    fn run(&self, _inv: &Invocation, _timeout: Duration) -> RunOutcome {
        RunOutcome::Exited(0)
    }
}

#[derive(Debug, Clone)]
enum Fallback {
    Succeed,
    Delegate(Arc<dyn ProcessRunner>),
}

/// Records every invocation instead of (or before) running it. Results
/// come from per-program overrides, else a fixed success or a delegate.
#[derive(Debug, Clone)]
pub struct RecordingRunner {
    log: Arc<Mutex<Vec<Invocation>>>,
    overrides: HashMap<String, RunOutcome>,
    fallback: Fallback,
}

impl Default for RecordingRunner {
    fn default() -> Self {
        Self::new()
    }
}

impl RecordingRunner {
    /// Dry run: nothing is spawned and every invocation succeeds.
    pub fn new() -> Self {
        Self {
            log: Arc::default(),
            overrides: HashMap::new(),
            fallback: Fallback::Succeed,
        }
    }

    /// Record, then run for real through `inner`.
    pub fn delegating(inner: Arc<dyn ProcessRunner>) -> Self {
        Self {
            fallback: Fallback::Delegate(inner),
            ..Self::new()
        }
    }

    pub fn with_result(mut self, program: impl Into<String>, outcome: RunOutcome) -> Self {
        self.overrides.insert(program.into(), outcome);
        self
    }

    pub fn invocations(&self) -> Vec<Invocation> {
        self.log.lock().expect("invocation log poisoned").clone()
    }

    pub fn clear(&self) {
        self.log.lock().expect("invocation log poisoned").clear();
    }
}

impl ProcessRunner for RecordingRunner {
    fn run(&self, inv: &Invocation, timeout: Duration) -> RunOutcome {
        self.log.lock().expect("invocation log poisoned").push(inv.clone());
        if let Some(o) = self.overrides.get(&inv.program) {
            return o.clone();
        }
        match &self.fallback {
            Fallback::Succeed => RunOutcome::Exited(0),
            Fallback::Delegate(r) => r.run(inv, timeout),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(program: &str, args: &[&str]) -> Invocation {
        let mut inv = Invocation::new(InvocationKind::Exec, program);
        inv.args = args.iter().map(|s| s.to_string()).collect();
        inv
    }

    #[test]
    fn exit_statuses() {
        let r = SystemRunner::quiet();
        let t = Duration::from_secs(5);
        assert!(r.run(&exec("/bin/true", &[]), t).success());
        assert_eq!(r.run(&exec("/bin/false", &[]), t), RunOutcome::Exited(1));
        assert!(matches!(r.run(&exec("/nonexistent", &[]), t), RunOutcome::SpawnFailed(_)));
    }

    #[test]
    fn timeout_kills_the_child() {
        let r = SystemRunner::quiet();
        let start = std::time::Instant::now();
        assert_eq!(r.run(&exec("/bin/sleep", &["5"]), Duration::from_millis(100)), RunOutcome::TimedOut);
        assert!(start.elapsed() < Duration::from_secs(3));
    }

    #[test]
    fn stdin_and_environment_reach_the_child() {
        let r = SystemRunner::quiet();
        let mut inv = exec("/bin/sh", &["-c", "read x; [ \"$x\" = \"$WANT\" ]"]);
        inv.env.push(("WANT".into(), "hey".into()));
        inv.stdin = Some(b"hey\n".to_vec());
        assert!(r.run(&inv, Duration::from_secs(5)).success());
        inv.stdin = Some(b"nope\n".to_vec());
        assert!(!r.run(&inv, Duration::from_secs(5)).success());
    }

    #[test]
    fn recording_runner_logs_and_overrides() {
        let r = RecordingRunner::new().with_result("/bin/x", RunOutcome::Exited(2));
        assert!(r.run(&exec("/bin/y", &["a"]), Duration::ZERO).success());
        assert!(!r.run(&exec("/bin/x", &[]), Duration::ZERO).success());
        let log = r.invocations();
        assert_eq!(log.len(), 2);
        assert_eq!(log[0].args, vec!["a"]);
    }
}
