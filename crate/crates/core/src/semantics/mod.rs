//! Static analysis: constant folding, type checking, usage analysis and
//! script validation.

pub mod builtins;
mod check;
mod fold;
pub mod ir;
pub mod scripts;
pub mod types;

use std::fmt;
use std::path::{Path, PathBuf};

pub use check::typecheck_program;
pub use fold::fold_constants;
pub use ir::*;
pub use scripts::{check_scripts, ScriptTable};
pub use types::{ExprType, TypeTuple, ValueType};

use crate::syntax::ast::BinOp;
use crate::syntax::{parse_source, Pos, SyntaxError};

/// Names the engine defines for every program. None can be declared or set.
pub const PREDEFINED: [&str; 4] = ["CurrLevel", "Time", "Uptime", "CurrRule"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub pos: Pos,
    pub message: String,
}

impl Diagnostic {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        Self {
            pos,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

impl From<SyntaxError> for Diagnostic {
    fn from(e: SyntaxError) -> Self {
        Diagnostic::new(e.pos, e.message)
    }
}

/// All static errors found in one rules file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileError {
    pub source_name: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for CompileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}:{}: error: {}", self.source_name, d.pos, d.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for CompileError {}

#[derive(Debug, Clone)]
pub struct CompileOptions {
    /// Name used in rule ids and diagnostics.
    pub source_name: String,
    /// Directory for resolving relative pattern-file and plugin paths.
    pub base_dir: PathBuf,
    /// When set, every level's transition scripts are validated.
    pub scripts_dir: Option<PathBuf>,
}

impl CompileOptions {
    pub fn new(source_name: impl Into<String>) -> Self {
        Self {
            source_name: source_name.into(),
            base_dir: PathBuf::from("."),
            scripts_dir: None,
        }
    }

    /// Options for a rules file on disk: its directory becomes the base
    /// for relative resource paths.
    pub fn for_file(path: &Path) -> Self {
        let base = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Self {
            source_name: path.display().to_string(),
            base_dir: std::path::absolute(&base).unwrap_or(base),
            scripts_dir: None,
        }
    }

    pub fn with_scripts(mut self, dir: impl Into<PathBuf>) -> Self {
        self.scripts_dir = Some(dir.into());
        self
    }

    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = dir.into();
        self
    }
}

/// Parse, fold and check a rules source.
pub fn compile(source: &str, opts: &CompileOptions) -> Result<CheckedProgram, CompileError> {
    let fail = |diagnostics| CompileError {
        source_name: opts.source_name.clone(),
        diagnostics,
    };
    let program = parse_source(source, &opts.source_name).map_err(|e| fail(vec![e.into()]))?;
    typecheck_program(&program, opts).map_err(fail)
}

/// Read and compile a rules file.
pub fn compile_file(path: &Path, scripts_dir: Option<&Path>) -> Result<CheckedProgram, CompileError> {
    let mut opts = CompileOptions::for_file(path);
    opts.scripts_dir = scripts_dir.map(Path::to_path_buf);
    let source = std::fs::read_to_string(path).map_err(|e| CompileError {
        source_name: opts.source_name.clone(),
        diagnostics: vec![Diagnostic::new(Pos::default(), format!("cannot read rules file: {e}"))],
    })?;
    compile(&source, &opts)
}

pub(crate) fn binary_mismatch_message(op: BinOp, a: ValueType, b: ValueType) -> String {
    if a != b && a.is_concrete() && b.is_concrete() {
        format!(
            "type mismatch: operator `{}` cannot combine {a} and {b} (no implicit casting)",
            op.as_str()
        )
    } else {
        format!("type mismatch: operator `{}` is not defined for {a}", op.as_str())
    }
}
