//! Execution: values, operators, the level state machine, the shared
//! runtime environment, the interpreter and the event loop.

pub mod clock;
pub mod engine;
pub mod env;
pub mod interp;
pub mod levels;
pub mod ops;
pub mod outcome;
pub mod process;
pub mod signals;
pub mod value;

use std::fmt;

pub use clock::{Clock, ManualClock, SystemClock};
pub use engine::{EngineConfig, Exit, Inbound, MainLoop, OutcomeSink, Progress, RuleEngine};
pub use env::{Runtime, RuntimeConfig};
pub use interp::Interpreter;
pub use levels::{LevelMachine, LevelSpec};
pub use outcome::{Outcome, OutcomeKind};
pub use process::{DryRunner, ProcessRunner, RecordingRunner, SystemRunner};
pub use signals::{Sig, SignalCounters};
pub use value::Value;

/// A dynamic error while evaluating a rule. The rule is abandoned and a
/// diagnostic alert is queued; the engine keeps running.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    DivisionByZero,
    /// Unreachable for checked programs; kept so evaluation stays total.
    TypeMismatch,
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fault::DivisionByZero => "division by zero",
            Fault::TypeMismatch => "type mismatch",
        })
    }
}

/// Why a rule stopped early.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stop {
    Fault(Fault),
    /// `crash` was executed; the engine must shut down.
    Crash(String),
}

impl From<Fault> for Stop {
    fn from(f: Fault) -> Self {
        Stop::Fault(f)
    }
}

impl From<ops::OpError> for Stop {
    fn from(e: ops::OpError) -> Self {
        Stop::Fault(e.into())
    }
}
