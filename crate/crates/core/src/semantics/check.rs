use std::collections::HashMap;
use std::path::PathBuf;

use regex::Regex;

use super::builtins::{self, ActionKind, Builtin, Callable, Signature};
use super::fold::{fold_constants, from_literal};
use super::ir::*;
use super::scripts::{check_scripts, script_problem};
use super::types::{ExprType, TypeTuple, ValueType};
use super::{binary_mismatch_message, CompileOptions, Diagnostic, PREDEFINED};
use crate::predicates::pattern::PatternSet;
use crate::runtime::levels::LevelSpec;
use crate::runtime::ops::{binary_result_type, unary_result_type};
use crate::runtime::signals::Sig;
use crate::runtime::value::Value;
use crate::syntax::ast::{Action, ConstDecl, Expr, ExprKind, Pos, Program, Rule, Section, SectionKind};

/// Fold, type-check and usage-check a parsed program, then validate
/// transition scripts when `opts.scripts_dir` is set. Every error found is
/// reported, ordered by position.
pub fn typecheck_program(program: &Program, opts: &CompileOptions) -> Result<CheckedProgram, Vec<Diagnostic>> {
    let folded = fold_constants(program).map_err(|d| vec![d])?;
    let mut c = Checker::new(&folded, opts);
    for section in &folded.sections {
        match section {
            Section::Levels { levels, .. } => {
                for l in levels {
                    if c.declare(&l.name, l.pos, Sym::Level(l.ordinal)) {
                        c.levels.push(LevelSpec {
                            name: l.name.clone(),
                            soft: l.soft,
                        });
                    }
                }
            }
            Section::Consts { consts, .. } => consts.iter().for_each(|d| c.const_decl(d)),
            Section::Vars { vars, .. } => vars.iter().for_each(|d| c.var_decl(d)),
            Section::Rules(rs) => {
                for rule in &rs.rules {
                    if let Some(r) = c.rule(rs.kind, rule) {
                        c.rules.push(r);
                    }
                }
            }
        }
    }
    c.usage();
    let mut scripts = None;
    if let Some(dir) = &opts.scripts_dir {
        let decls: Vec<_> = folded.levels().cloned().collect();
        match check_scripts(&decls, dir) {
            Ok(t) => scripts = Some(t),
            Err(errs) => c.errors.extend(errs),
        }
    }
    if !c.errors.is_empty() {
        let mut errors = c.errors;
        errors.sort_by_key(|d| d.pos);
        return Err(errors);
    }
    Ok(CheckedProgram {
        source_name: opts.source_name.clone(),
        program: folded,
        levels: c.levels,
        consts: c.consts,
        vars: c.vars,
        rules: c.rules,
        regexes: c.regexes,
        patterns: c.patterns,
        plugins: c.plugins,
        scripts,
    })
}

#[derive(Debug, Clone, Copy)]
enum Sym {
    Level(usize),
    Const(usize),
    Var(usize),
}

struct Checker<'a> {
    opts: &'a CompileOptions,
    /// Every declaration in the file, for "used before declaration" errors.
    all_decls: HashMap<String, Pos>,
    total_levels: usize,
    syms: HashMap<String, (Sym, Pos)>,
    levels: Vec<LevelSpec>,
    consts: Vec<ConstInfo>,
    vars: Vec<VarSlot>,
    reads: Vec<bool>,
    writes: Vec<bool>,
    rules: Vec<CheckedRule>,
    regexes: Vec<RegexResource>,
    patterns: Vec<PatternResource>,
    plugins: Vec<PathBuf>,
    errors: Vec<Diagnostic>,
}

impl<'a> Checker<'a> {
    fn new(program: &Program, opts: &'a CompileOptions) -> Self {
        let mut all_decls = HashMap::new();
        for l in program.levels() {
            all_decls.entry(l.name.clone()).or_insert(l.pos);
        }
        for d in program.consts().chain(program.vars()) {
            all_decls.entry(d.name.clone()).or_insert(d.pos);
        }
        Self {
            opts,
            all_decls,
            total_levels: program.levels().count(),
            syms: HashMap::new(),
            levels: Vec::new(),
            consts: Vec::new(),
            vars: Vec::new(),
            reads: Vec::new(),
            writes: Vec::new(),
            rules: Vec::new(),
            regexes: Vec::new(),
            patterns: Vec::new(),
            plugins: Vec::new(),
            errors: Vec::new(),
        }
    }

    fn error(&mut self, pos: Pos, msg: impl Into<String>) {
        self.errors.push(Diagnostic::new(pos, msg));
    }

    /// Register a name, rejecting collisions. Returns false on error.
    fn declare(&mut self, name: &str, pos: Pos, sym: Sym) -> bool {
        if PREDEFINED.contains(&name) {
            self.error(pos, format!("`{name}` is a predefined name and cannot be declared"));
            return false;
        }
        if builtins::lookup(name).is_some() {
            self.error(pos, format!("`{name}` is a builtin and cannot be declared"));
            return false;
        }
        if let Some((_, prev)) = self.syms.get(name) {
            let prev = *prev;
            self.error(pos, format!("`{name}` is already declared at {prev}"));
            return false;
        }
        self.syms.insert(name.to_string(), (sym, pos));
        true
    }

    /// Value and level alias of a folded initializer.
    fn initializer(&mut self, d: &ConstDecl, what: &str) -> Option<(Value, Option<usize>)> {
        let declared = ValueType::from(d.ty);
        match &d.init.kind {
            ExprKind::Lit(l) => {
                let v = from_literal(l);
                if v.value_type() != declared {
                    self.error(
                        d.init.pos,
                        format!(
                            "type mismatch: {what} `{}` is declared {declared} but initialized with {}",
                            d.name,
                            v.value_type()
                        ),
                    );
                    return None;
                }
                Some((v, None))
            }
            ExprKind::Name(n) => {
                let level = match self.syms.get(n) {
                    Some((Sym::Level(o), _)) => Some(*o),
                    Some((Sym::Const(i), _)) => self.consts[*i].level,
                    _ => None,
                };
                let Some(o) = level else {
                    self.error(d.init.pos, format!("non-constant initializer for `{}`", d.name));
                    return None;
                };
                if declared != ValueType::Int {
                    self.error(
                        d.init.pos,
                        format!(
                            "type mismatch: {what} `{}` is declared {declared} but initialized with level `{n}`",
                            d.name
                        ),
                    );
                    return None;
                }
                Some((Value::Int(o as i64), Some(o)))
            }
            _ => {
                self.error(d.init.pos, format!("non-constant initializer for `{}`", d.name));
                None
            }
        }
    }

    fn const_decl(&mut self, d: &ConstDecl) {
        let Some((value, level)) = self.initializer(d, "const") else {
            return;
        };
        let idx = self.consts.len();
        if self.declare(&d.name, d.pos, Sym::Const(idx)) {
            self.consts.push(ConstInfo {
                name: d.name.clone(),
                ty: d.ty.into(),
                value,
                level,
                pos: d.pos,
            });
        }
    }

    fn var_decl(&mut self, d: &ConstDecl) {
        let Some((init, level)) = self.initializer(d, "variable") else {
            return;
        };
        let slot = self.vars.len();
        if self.declare(&d.name, d.pos, Sym::Var(slot)) {
            self.vars.push(VarSlot {
                name: d.name.clone(),
                ty: d.ty.into(),
                init,
                level_init: level.is_some(),
                pos: d.pos,
            });
            self.reads.push(false);
            self.writes.push(false);
        }
    }

    fn usage(&mut self) {
        for i in 0..self.vars.len() {
            let (r, w) = (self.reads[i], self.writes[i]);
            let v = &self.vars[i];
            let msg = match (r, w) {
                (false, false) => format!("variable `{}` is never used", v.name),
                (true, false) => format!("variable `{}` is never set", v.name),
                (false, true) => format!("variable `{}` is set but never read", v.name),
                (true, true) => continue,
            };
            let pos = v.pos;
            self.error(pos, msg);
        }
    }

    fn rule(&mut self, kind: SectionKind, rule: &Rule) -> Option<CheckedRule> {
        let trigger = self.expr(&rule.trigger, kind);
        if let Some(t) = &trigger {
            if t.ty.value != ValueType::Bool {
                self.error(
                    rule.trigger.pos,
                    format!("rule condition must be bool, found {}", t.ty.value),
                );
            }
        }
        let mut chain = Vec::with_capacity(rule.chain.len());
        let mut ok = trigger.is_some();
        for link in &rule.chain {
            match self.action(&link.action, kind) {
                Some(action) => chain.push(CheckedLink {
                    action,
                    next: link.next,
                }),
                None => ok = false,
            }
        }
        ok.then(|| CheckedRule {
            id: rule.id.clone(),
            kind,
            trigger: trigger.unwrap(),
            chain,
            pos: rule.pos,
        })
    }

    fn unknown(&mut self, name: &str, pos: Pos) {
        match self.all_decls.get(name) {
            Some(decl) if *decl > pos => {
                let decl = *decl;
                self.error(pos, format!("`{name}` is used before its declaration at {decl}"))
            }
            _ => self.error(pos, format!("unknown identifier `{name}`")),
        }
    }

    fn expr(&mut self, e: &Expr, kind: SectionKind) -> Option<TExpr> {
        let mk = |k: TExprKind, value: ValueType| TExpr {
            kind: k,
            ty: TypeTuple::universal(value),
            pos: e.pos,
        };
        match &e.kind {
            ExprKind::Lit(l) => {
                let v = from_literal(l);
                let t = v.value_type();
                Some(mk(TExprKind::Lit(v), t))
            }
            ExprKind::Name(n) => self.name(n, e.pos),
            ExprKind::Unary(op, inner) => {
                let inner = self.expr(inner, kind)?;
                let Some(t) = unary_result_type(*op, inner.ty.value) else {
                    self.error(
                        e.pos,
                        format!(
                            "type mismatch: operator `{}` is not defined for {}",
                            op.as_str(),
                            inner.ty.value
                        ),
                    );
                    return None;
                };
                let et = inner.ty.expr;
                Some(TExpr {
                    kind: TExprKind::Unary(*op, Box::new(inner)),
                    ty: TypeTuple::new(t, et),
                    pos: e.pos,
                })
            }
            ExprKind::Binary(op, l, r) => {
                let l = self.expr(l, kind);
                let r = self.expr(r, kind);
                let (l, r) = (l?, r?);
                let Some(t) = binary_result_type(*op, l.ty.value, r.ty.value) else {
                    self.error(e.pos, binary_mismatch_message(*op, l.ty.value, r.ty.value));
                    return None;
                };
                let et = l.ty.expr.combine(r.ty.expr);
                if et == ExprType::Undefined {
                    self.error(
                        e.pos,
                        format!("cannot combine {} and {} expressions", l.ty.expr, r.ty.expr),
                    );
                    return None;
                }
                Some(TExpr {
                    kind: TExprKind::Binary(*op, Box::new(l), Box::new(r)),
                    ty: TypeTuple::new(t, et),
                    pos: e.pos,
                })
            }
            ExprKind::Call(name, args) => self.call(name, args, e.pos, kind),
        }
    }

    fn name(&mut self, n: &str, pos: Pos) -> Option<TExpr> {
        let mk = |k: TExprKind, value: ValueType| {
            Some(TExpr {
                kind: k,
                ty: TypeTuple::universal(value),
                pos,
            })
        };
        match n {
            "CurrLevel" => {
                if self.total_levels == 0 {
                    self.error(pos, "`CurrLevel` requires at least one declared level");
                    return None;
                }
                return mk(TExprKind::Predef(Predef::CurrLevel), ValueType::Int);
            }
            "Time" => return mk(TExprKind::Predef(Predef::Time), ValueType::Int),
            "Uptime" => return mk(TExprKind::Predef(Predef::Uptime), ValueType::Int),
            "CurrRule" => return mk(TExprKind::Predef(Predef::CurrRule), ValueType::String),
            _ => {}
        }
        match self.syms.get(n).map(|s| s.0) {
            Some(Sym::Level(o)) => mk(TExprKind::Level(o), ValueType::Int),
            Some(Sym::Const(i)) => {
                let c = &self.consts[i];
                match c.level {
                    Some(o) => mk(TExprKind::Level(o), ValueType::Int),
                    None => {
                        let v = c.value.clone();
                        let t = c.ty;
                        mk(TExprKind::Lit(v), t)
                    }
                }
            }
            Some(Sym::Var(slot)) => {
                self.reads[slot] = true;
                let t = self.vars[slot].ty;
                mk(TExprKind::Var(slot), t)
            }
            None => {
                if builtins::lookup(n).is_some() {
                    self.error(pos, format!("builtin `{n}` must be called with parentheses"));
                } else {
                    self.unknown(n, pos);
                }
                None
            }
        }
    }

    /// Whether `e` may be used where a level is expected.
    fn is_level_expr(&self, e: &Expr) -> bool {
        let ExprKind::Name(n) = &e.kind else {
            return false;
        };
        if n == "CurrLevel" {
            return true;
        }
        match self.syms.get(n).map(|s| s.0) {
            Some(Sym::Level(_)) => true,
            Some(Sym::Const(i)) => self.consts[i].level.is_some(),
            Some(Sym::Var(slot)) => self.vars[slot].level_init,
            None => false,
        }
    }

    fn level_arg(&mut self, e: &Expr, builtin: &str) {
        if self.total_levels == 0 {
            self.error(e.pos, format!("`{builtin}` requires at least one declared level"));
        } else if !self.is_level_expr(e) {
            self.error(
                e.pos,
                format!(
                    "argument of `{builtin}` must be a level: a level name, a constant or variable \
                     initialized with a level, or `CurrLevel`"
                ),
            );
        }
    }

    fn check_arity(&mut self, sig: &Signature, n: usize, pos: Pos) -> bool {
        if sig.accepts_arity(n) {
            return true;
        }
        self.error(
            pos,
            format!("`{}` expects {} arguments, found {n}", sig.name, sig.arity_text()),
        );
        false
    }

    /// Type-check argument `i` of `sig` against its declared parameter.
    fn typed_arg(&mut self, sig: &Signature, i: usize, arg: &Expr, kind: SectionKind) -> Option<TExpr> {
        let t = self.expr(arg, kind)?;
        let want = sig.param(i).unwrap_or(ValueType::Universal);
        if want.is_concrete() && t.ty.value != want {
            self.error(
                arg.pos,
                format!(
                    "type mismatch: argument {} of `{}` must be {want}, found {}",
                    i + 1,
                    sig.name,
                    t.ty.value
                ),
            );
            return None;
        }
        Some(t)
    }

    fn typed_args(&mut self, sig: &Signature, args: &[Expr], kind: SectionKind) -> Option<Vec<TExpr>> {
        let typed: Vec<_> = args
            .iter()
            .enumerate()
            .map(|(i, a)| self.typed_arg(sig, i, a, kind))
            .collect();
        typed.into_iter().collect()
    }

    /// A compile-time string argument such as a regex or a file path.
    fn const_string(&mut self, sig: &Signature, arg: &Expr, what: &str) -> Option<String> {
        match &arg.kind {
            ExprKind::Lit(l) => match from_literal(l) {
                Value::Str(s) => Some(s),
                other => {
                    self.error(
                        arg.pos,
                        format!(
                            "type mismatch: argument 1 of `{}` must be string, found {}",
                            sig.name,
                            other.value_type()
                        ),
                    );
                    None
                }
            },
            _ => {
                self.error(
                    arg.pos,
                    format!("argument of `{}` must be a constant string ({what})", sig.name),
                );
                None
            }
        }
    }

    fn resolve_path(&self, s: &str) -> PathBuf {
        let p = PathBuf::from(s);
        if p.is_absolute() {
            p
        } else {
            self.opts.base_dir.join(p)
        }
    }

    fn call(&mut self, name: &str, args: &[Expr], pos: Pos, kind: SectionKind) -> Option<TExpr> {
        let Some(sig) = builtins::lookup(name) else {
            self.error(pos, format!("unknown function `{name}`"));
            return None;
        };
        let Callable::Expr(b) = sig.callable else {
            self.error(pos, format!("`{name}` is an action and cannot be used in an expression"));
            return None;
        };
        if sig.expr_type != ExprType::Universal && sig.expr_type != ExprType::from(kind) {
            self.error(
                pos,
                format!(
                    "`{name}` is a {} expression and cannot be used in a {kind} rule",
                    sig.expr_type
                ),
            );
            return None;
        }
        if !self.check_arity(sig, args.len(), pos) {
            return None;
        }
        let resource = match b {
            Builtin::TopicMatches => {
                let src = self.const_string(sig, &args[0], "a regular expression")?;
                let idx = match self.regexes.iter().position(|r| r.source == src) {
                    Some(i) => i,
                    None => match Regex::new(&anchored(&src)) {
                        Ok(regex) => {
                            self.regexes.push(RegexResource { source: src, regex });
                            self.regexes.len() - 1
                        }
                        Err(e) => {
                            let first = e.to_string().lines().last().unwrap_or_default().trim().to_string();
                            self.error(args[0].pos, format!("invalid regular expression {src:?}: {first}"));
                            return None;
                        }
                    },
                };
                Some(TExprKind::TopicMatches(idx))
            }
            Builtin::Payload => {
                let s = self.const_string(sig, &args[0], "a pattern file path")?;
                let path = self.resolve_path(&s);
                let idx = match self.patterns.iter().position(|p| p.path == path) {
                    Some(i) => i,
                    None => match PatternSet::load(&path) {
                        Ok(set) => {
                            self.patterns.push(PatternResource { path, set });
                            self.patterns.len() - 1
                        }
                        Err(e) => {
                            self.error(args[0].pos, format!("pattern file {}: {e}", path.display()));
                            return None;
                        }
                    },
                };
                Some(TExprKind::Payload(idx))
            }
            Builtin::Plugin => {
                let s = self.const_string(sig, &args[0], "a plugin path")?;
                let path = self.resolve_path(&s);
                if let Some(problem) = script_problem(&path) {
                    self.error(args[0].pos, format!("plugin: {}", problem.trim_start_matches("script ")));
                    return None;
                }
                let idx = match self.plugins.iter().position(|p| *p == path) {
                    Some(i) => i,
                    None => {
                        self.plugins.push(path);
                        self.plugins.len() - 1
                    }
                };
                Some(TExprKind::Plugin(idx))
            }
            Builtin::Signal => {
                let s = self.const_string(sig, &args[0], "a signal name")?;
                match Sig::from_name(&s) {
                    Some(sg) => Some(TExprKind::Signal(sg)),
                    None => {
                        self.error(args[0].pos, format!("unknown signal {s:?}: expected \"SIGUSR1\" or \"SIGUSR2\""));
                        return None;
                    }
                }
            }
            _ => None,
        };
        if let Some(k) = resource {
            return Some(TExpr {
                kind: k,
                ty: TypeTuple::new(sig.ret, sig.expr_type),
                pos,
            });
        }
        if b == Builtin::LevelName {
            self.level_arg(&args[0], name);
        }
        let targs = self.typed_args(sig, args, kind)?;
        let et = targs.iter().fold(sig.expr_type, |acc, a| acc.combine(a.ty.expr));
        if et == ExprType::Undefined {
            self.error(pos, format!("arguments of `{name}` mix expressions of different sections"));
            return None;
        }
        Some(TExpr {
            kind: TExprKind::Call(b, targs),
            ty: TypeTuple::new(sig.ret, et),
            pos,
        })
    }

    fn action(&mut self, a: &Action, kind: SectionKind) -> Option<TAction> {
        let Some(sig) = builtins::lookup(&a.name) else {
            self.error(a.pos, format!("unknown action `{}`", a.name));
            return None;
        };
        let Callable::Action(ak) = sig.callable else {
            self.error(a.pos, format!("`{}` is an expression and cannot be used as an action", a.name));
            return None;
        };
        if !self.check_arity(sig, a.args.len(), a.pos) {
            return None;
        }
        match ak {
            ActionKind::Set => self.set_action(&a.args[0], &a.args[1], kind),
            ActionKind::Trigger => {
                self.level_arg(&a.args[0], "trigger");
                Some(TAction::Trigger(self.typed_arg(sig, 0, &a.args[0], kind)?))
            }
            ActionKind::Crash => Some(TAction::Crash(self.typed_arg(sig, 0, &a.args[0], kind)?)),
            ActionKind::Alert => Some(TAction::Alert(self.typed_arg(sig, 0, &a.args[0], kind)?)),
            ActionKind::Exec => {
                let mut args = self.typed_args(sig, &a.args, kind)?;
                let program = args.remove(0);
                Some(TAction::Exec { program, args })
            }
            ActionKind::True | ActionKind::False => Some(TAction::Debug {
                result: ak == ActionKind::True,
                args: self.typed_args(sig, &a.args, kind)?,
            }),
        }
    }

    fn set_action(&mut self, target: &Expr, value: &Expr, kind: SectionKind) -> Option<TAction> {
        let value = self.expr(value, kind);
        let ExprKind::Name(n) = &target.kind else {
            self.error(target.pos, "first argument of `set` must be a variable name");
            return None;
        };
        if PREDEFINED.contains(&n.as_str()) {
            self.error(target.pos, format!("cannot assign to predefined variable `{n}`"));
            return None;
        }
        let slot = match self.syms.get(n.as_str()).map(|s| s.0) {
            Some(Sym::Var(slot)) => slot,
            Some(Sym::Const(_)) => {
                self.error(target.pos, format!("cannot assign to constant `{n}`"));
                return None;
            }
            Some(Sym::Level(_)) => {
                self.error(target.pos, format!("cannot assign to level `{n}`"));
                return None;
            }
            None => {
                self.unknown(n, target.pos);
                return None;
            }
        };
        self.writes[slot] = true;
        let value = value?;
        let want = self.vars[slot].ty;
        if value.ty.value != want {
            self.error(
                value.pos,
                format!("type mismatch: cannot assign {} to {want} variable `{n}`", value.ty.value),
            );
            return None;
        }
        Some(TAction::Set { slot, value })
    }
}
