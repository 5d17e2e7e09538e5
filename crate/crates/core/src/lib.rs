//! RIPS: a statically typed rule language for intrusion prevention over a
//! publish/subscribe computation graph, with an interpreter, a transpiler
//! to Rust, and the monitor wire protocol.

pub mod gen;
pub mod host;
pub mod predicates;
pub mod runtime;
pub mod semantics;
pub mod sim;
pub mod support;
pub mod syntax;
pub mod transpile;
pub mod wire;

pub use predicates::{GraphContext, MessageContext, Node, Service, Topic};
pub use runtime::{Interpreter, LevelSpec, Outcome, OutcomeKind, RuleEngine, Runtime, RuntimeConfig, Value};
pub use semantics::{compile, compile_file, CheckedProgram, CompileError, CompileOptions};
pub use syntax::{parse_source, SyntaxError};
pub use wire::{EventKind, InboundEvent};
