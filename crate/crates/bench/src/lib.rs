//! Generated engines for the rules fixtures and for seeded random
//! programs, each paired with its source so the interpreter can run the
//! same program.

use std::path::Path;
use std::sync::Arc;

use rips_core::semantics::{compile, CheckedProgram, CompileError, CompileOptions};
use rips_core::{Interpreter, LevelSpec, RuleEngine};

/// A program compiled into this crate.
#[derive(Clone, Copy)]
pub struct Program {
    pub name: &'static str,
    pub source_name: &'static str,
    pub source: &'static str,
    pub levels: fn() -> Vec<LevelSpec>,
    /// Build the generated engine with its initial state.
    pub make: fn() -> Result<Box<dyn RuleEngine>, String>,
}

impl std::fmt::Debug for Program {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Program").field("name", &self.name).finish_non_exhaustive()
    }
}

include!(concat!(env!("OUT_DIR"), "/registry.rs"));

/// Directory holding the fixtures; relative resource paths of every
/// registered program resolve against it.
pub fn rules_dir() -> &'static Path {
    Path::new(RULES_DIR)
}

impl Program {
    /// Check the source the way the generated engine was checked.
    pub fn compile(&self) -> Result<CheckedProgram, CompileError> {
        compile(self.source, &CompileOptions::new(self.source_name).with_base_dir(rules_dir()))
    }

    pub fn interpreter(&self) -> Result<Interpreter, CompileError> {
        Ok(Interpreter::new(Arc::new(self.compile()?)))
    }

    pub fn generated(&self) -> Box<dyn RuleEngine> {
        (self.make)().unwrap_or_else(|e| panic!("{}: {e}", self.name))
    }
}

/// Every registered program.
pub fn all() -> impl Iterator<Item = &'static Program> {
    FIXTURES.iter().chain(RANDOM)
}

pub fn fixture(name: &str) -> Option<&'static Program> {
    FIXTURES.iter().find(|p| p.name == name)
}

/// The registered program with exactly this source text.
pub fn find_by_source(source: &str) -> Option<&'static Program> {
    all().find(|p| p.source == source)
}

/// Program timed by the default benchmark.
pub const DEFAULT_PROGRAM: &str = "example";
/// Events in the default benchmark corpus.
pub const DEFAULT_EVENTS: usize = 10_000;
