//! Typed, name-resolved program representation shared by the interpreter
//! and the code generator.

use std::path::PathBuf;

use regex::Regex;

use super::builtins::Builtin;
use super::scripts::ScriptTable;
use super::types::{TypeTuple, ValueType};
use crate::predicates::pattern::PatternSet;
use crate::runtime::levels::LevelSpec;
use crate::runtime::signals::Sig;
use crate::runtime::value::Value;
use crate::syntax::ast::{BinOp, Connector, Pos, Program, SectionKind, UnOp};

#[derive(Debug, Clone)]
pub struct CheckedProgram {
    pub source_name: String,
    /// The folded AST the checker ran over.
    pub program: Program,
    pub levels: Vec<LevelSpec>,
    pub consts: Vec<ConstInfo>,
    pub vars: Vec<VarSlot>,
    /// Rules of all sections, each section kind in declaration order.
    pub rules: Vec<CheckedRule>,
    pub regexes: Vec<RegexResource>,
    pub patterns: Vec<PatternResource>,
    pub plugins: Vec<PathBuf>,
    /// Present when the program was checked against a scripts directory.
    pub scripts: Option<ScriptTable>,
}

impl CheckedProgram {
    pub fn rules_of(&self, kind: SectionKind) -> impl Iterator<Item = &CheckedRule> {
        self.rules.iter().filter(move |r| r.kind == kind)
    }

    pub fn level_names(&self) -> Vec<String> {
        self.levels.iter().map(|l| l.name.clone()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ConstInfo {
    pub name: String,
    pub ty: ValueType,
    pub value: Value,
    /// Set when the const names a level.
    pub level: Option<usize>,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub struct VarSlot {
    pub name: String,
    pub ty: ValueType,
    pub init: Value,
    /// The initializer was a level name, so the var may be used as a level.
    pub level_init: bool,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub struct RegexResource {
    /// Pattern as written in the rules file.
    pub source: String,
    /// Compiled with full-match anchoring.
    pub regex: Regex,
}

/// Anchored form used for every `topicmatches` pattern.
pub fn anchored(pattern: &str) -> String {
    format!("^(?:{pattern})$")
}

#[derive(Debug, Clone)]
pub struct PatternResource {
    pub path: PathBuf,
    pub set: PatternSet,
}

#[derive(Debug, Clone)]
pub struct CheckedRule {
    pub id: String,
    pub kind: SectionKind,
    pub trigger: TExpr,
    pub chain: Vec<CheckedLink>,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub struct CheckedLink {
    pub action: TAction,
    pub next: Option<Connector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predef {
    CurrLevel,
    Time,
    Uptime,
    CurrRule,
}

#[derive(Debug, Clone)]
pub struct TExpr {
    pub kind: TExprKind,
    pub ty: TypeTuple,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub enum TExprKind {
    Lit(Value),
    Level(usize),
    Var(usize),
    Predef(Predef),
    Unary(UnOp, Box<TExpr>),
    Binary(BinOp, Box<TExpr>, Box<TExpr>),
    /// Builtin whose arguments are evaluated at runtime.
    Call(Builtin, Vec<TExpr>),
    /// `topicmatches` with its precompiled regex.
    TopicMatches(usize),
    /// `payload` with its loaded pattern file.
    Payload(usize),
    Plugin(usize),
    Signal(Sig),
}

#[derive(Debug, Clone)]
pub enum TAction {
    Set { slot: usize, value: TExpr },
    Crash(TExpr),
    Alert(TExpr),
    Exec { program: TExpr, args: Vec<TExpr> },
    /// `True(...)` / `False(...)`: print arguments, return `result`.
    Debug { result: bool, args: Vec<TExpr> },
    Trigger(TExpr),
}

impl TExpr {
    /// Visit this expression and all descendants, parents first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a TExpr)) {
        f(self);
        match &self.kind {
            TExprKind::Unary(_, e) => e.walk(f),
            TExprKind::Binary(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            TExprKind::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
            _ => {}
        }
    }
}

impl TAction {
    pub fn args(&self) -> Vec<&TExpr> {
        match self {
            TAction::Set { value, .. } => vec![value],
            TAction::Crash(e) | TAction::Alert(e) | TAction::Trigger(e) => vec![e],
            TAction::Exec { program, args } => std::iter::once(program).chain(args).collect(),
            TAction::Debug { args, .. } => args.iter().collect(),
        }
    }
}
