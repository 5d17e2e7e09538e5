//! Translation of a checked program into Rust source implementing
//! [`RuleEngine`](crate::runtime::RuleEngine).
//!
//! Each rule becomes a method: the trigger is inlined as a typed Rust
//! expression and the action chain is lowered to early returns. Builtins,
//! operators with non-trivial semantics and all actions call into
//! [`crate::support`], so both execution modes share one implementation.

mod emit;

use std::path::Path;

use crate::semantics::CheckedProgram;

pub use emit::rust_string_literal;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub source: String,
    /// RFC 3339 UTC. The only line that differs between runs.
    pub generated_at: String,
    pub engine_version: String,
    pub scripts_dir: Option<String>,
}

#[derive(Debug, Clone)]
pub struct GeneratedProgram {
    pub source: String,
    pub manifest: Manifest,
}

#[derive(Debug, Clone)]
pub struct TranspileOptions {
    /// Emit `fn main` so the output is a complete binary crate root.
    /// Without it the output is a module body for `include!`.
    pub with_main: bool,
    /// Path through which generated code reaches the support layer.
    pub crate_path: String,
    /// Overrides the manifest timestamp.
    pub generated_at: Option<String>,
}

impl Default for TranspileOptions {
    fn default() -> Self {
        Self {
            with_main: true,
            crate_path: "rips_core".to_string(),
            generated_at: None,
        }
    }
}

impl TranspileOptions {
    pub fn module() -> Self {
        Self {
            with_main: false,
            ..Self::default()
        }
    }
}

pub fn transpile_program(checked: &CheckedProgram, opts: &TranspileOptions) -> GeneratedProgram {
    let manifest = Manifest {
        source: checked.source_name.clone(),
        generated_at: opts
            .generated_at
            .clone()
            .unwrap_or_else(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        scripts_dir: checked.scripts.as_ref().map(|s| path_text(&s.dir)),
    };
    let source = emit::emit(checked, &manifest, opts);
    GeneratedProgram { source, manifest }
}

fn path_text(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}
