//! Everything a generated program refers to. Generated code calls the same
//! predicates, operators and runtime actions as the interpreter.

use std::path::Path;

pub use regex::Regex;

pub use crate::host::{generated_main, GeneratedSpec};
pub use crate::predicates::{graph, msg, GraphContext, MessageContext, PatternSet};
pub use crate::runtime::ops::{concat, int_div, int_rem};
pub use crate::runtime::value::{render_bool, render_float, render_int, Value};
pub use crate::runtime::{LevelSpec, RuleEngine, Runtime, Sig, Stop};
use crate::semantics::anchored;
use crate::semantics::scripts::script_problem;

/// Compile a `topicmatches` pattern with full-match anchoring.
pub fn regex(pattern: &str) -> Result<Regex, String> {
    Regex::new(&anchored(pattern)).map_err(|e| format!("invalid regular expression {pattern:?}: {e}"))
}

pub fn patterns(path: &str) -> Result<PatternSet, String> {
    PatternSet::load(Path::new(path)).map_err(|e| format!("pattern file {path}: {e}"))
}

/// Startup validation of a plugin executable.
pub fn plugin(path: &'static str) -> Result<&'static Path, String> {
    let p = Path::new(path);
    match script_problem(p) {
        None => Ok(p),
        Some(problem) => Err(format!("plugin: {problem}")),
    }
}

pub fn dump_str(s: &str) -> String {
    Value::string(s).dump_repr()
}
