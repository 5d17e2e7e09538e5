//! What a scenario run observed and how it compares with the expectations.

use std::fmt::Write as _;

use super::scenario::{Matcher, Scenario};
use crate::runtime::{Outcome, OutcomeKind};

#[derive(Debug, Clone, PartialEq)]
pub struct Observed {
    /// Seconds since the scenario start.
    pub t: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationResult {
    pub matcher: Matcher,
    /// Index into [`RunReport::observed`].
    pub matched: Option<usize>,
    /// Seconds from the cause to the matching outcome.
    pub latency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scenario: String,
    pub polling: f64,
    pub events_sent: u64,
    pub observed: Vec<Observed>,
    pub expectations: Vec<ExpectationResult>,
    /// Outcomes no expectation claimed.
    pub unexpected: usize,
    pub exact: bool,
    /// Set when the engine went away before the scenario finished.
    pub aborted: Option<String>,
    /// Message of a `crash` action.
    pub crashed: Option<String>,
    /// Final variable values.
    pub vars: Vec<(String, String)>,
}

impl RunReport {
    /// Match expectations in order against the observed outcomes.
    pub fn evaluate(scn: &Scenario, polling: f64, events_sent: u64, observed: Vec<Observed>) -> Self {
        let mut cursor = 0;
        let mut claimed = 0;
        let expectations = scn
            .expect
            .iter()
            .map(|m| {
                let found = observed[cursor..].iter().position(|o| m.matches(&o.outcome)).map(|i| i + cursor);
                let latency = found.map(|i| {
                    cursor = i + 1;
                    claimed += 1;
                    let t = observed[i].t;
                    let cause = m.after.unwrap_or_else(|| {
                        scn.timeline
                            .iter()
                            .map(|e| e.at)
                            .take_while(|&at| at <= t)
                            .last()
                            .unwrap_or(0.0)
                    });
                    (t - cause).max(0.0)
                });
                ExpectationResult {
                    matcher: m.clone(),
                    matched: found,
                    latency,
                }
            })
            .collect();
        Self {
            scenario: scn.name.clone(),
            polling,
            events_sent,
            unexpected: observed.len() - claimed,
            observed,
            expectations,
            exact: scn.exact,
            aborted: None,
            crashed: None,
            vars: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.aborted.is_none()
            && self.expectations.iter().all(|e| e.matched.is_some())
            && (!self.exact || self.unexpected == 0)
    }

    pub fn level_changes(&self) -> impl Iterator<Item = &str> {
        self.observed.iter().filter_map(|o| o.outcome.level())
    }

    pub fn alerts(&self) -> impl Iterator<Item = &str> {
        self.observed.iter().filter_map(|o| o.outcome.text())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", self.scenario);
        let _ = writeln!(s, "polling: {}s", self.polling);
        let _ = writeln!(s, "events sent: {}", self.events_sent);
        let _ = writeln!(s, "outcomes: {}", self.observed.len());
        for o in &self.observed {
            let what = match &o.outcome.kind {
                OutcomeKind::LevelChange { level, ordinal, gravity } => {
                    format!("level {level} (ordinal {ordinal}, gravity {gravity:?})")
                }
                OutcomeKind::Alert { text } => format!("alert {text:?}"),
            };
            let _ = writeln!(s, "  t={:.3}s {what}", o.t);
        }
        if !self.expectations.is_empty() {
            let _ = writeln!(s, "expectations:");
        }
        for e in &self.expectations {
            let _ = match (e.matched, e.latency) {
                (Some(i), Some(l)) => writeln!(
                    s,
                    "  PASS {} at t={:.3}s, latency {:.3}s",
                    e.matcher.describe(),
                    self.observed[i].t,
                    l
                ),
                _ => writeln!(s, "  FAIL {}: not observed", e.matcher.describe()),
            };
        }
        let _ = writeln!(s, "unexpected outcomes: {}", self.unexpected);
        if let Some(c) = &self.crashed {
            let _ = writeln!(s, "crashed: {c}");
        }
        if let Some(a) = &self.aborted {
            let _ = writeln!(s, "aborted: {a}");
        }
        let _ = writeln!(s, "result: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}
