//! Compile-time evaluation of const/var initializers and constant rule
//! subexpressions, using the runtime's own operator semantics.

use std::collections::{HashMap, HashSet};

use super::{Diagnostic, PREDEFINED};
use crate::runtime::ops::{self, OpError};
use crate::runtime::value::Value;
use crate::syntax::ast::{ChainLink, ConstDecl, Expr, ExprKind, Literal, Program, Rule, Section};

#[derive(Debug, Clone)]
enum Folded {
    Value(Value),
    /// A level, or a const that names a level.
    Level(usize),
}

impl Folded {
    fn into_value(self) -> Value {
        match self {
            Folded::Value(v) => v,
            Folded::Level(o) => Value::Int(o as i64),
        }
    }
}

#[derive(Default)]
struct Scope {
    levels: HashMap<String, usize>,
    level_names: Vec<String>,
    consts: HashMap<String, Folded>,
    vars: HashSet<String>,
}

/// Replace every const/var initializer by its literal value and fold
/// constant subtrees of rule expressions.
///
/// Initializers that are a bare level name (or a const naming a level) are
/// kept as names so the checker can track level-typed ints. Subtrees whose
/// operand types do not fit are left alone for the checker to report.
pub fn fold_constants(program: &Program) -> Result<Program, Diagnostic> {
    let mut scope = Scope::default();
    let mut out = program.clone();
    for section in &mut out.sections {
        match section {
            Section::Levels { levels, .. } => {
                for l in levels.iter() {
                    scope.levels.insert(l.name.clone(), l.ordinal);
                    scope.level_names.push(l.name.clone());
                }
            }
            Section::Consts { consts, .. } => {
                for c in consts.iter_mut() {
                    let folded = fold_initializer(&scope, c)?;
                    scope.consts.insert(c.name.clone(), folded);
                }
            }
            Section::Vars { vars, .. } => {
                for v in vars.iter_mut() {
                    fold_initializer(&scope, v)?;
                    scope.vars.insert(v.name.clone());
                }
            }
            Section::Rules(rs) => {
                for rule in &mut rs.rules {
                    fold_rule(&scope, rule)?;
                }
            }
        }
    }
    Ok(out)
}

fn fold_initializer(scope: &Scope, decl: &mut ConstDecl) -> Result<Folded, Diagnostic> {
    let folded = const_eval(scope, &decl.init)?;
    match (&folded, &decl.init.kind) {
        (Folded::Level(_), ExprKind::Name(_)) => {}
        _ => {
            let v = folded.clone().into_value();
            decl.init = Expr::new(ExprKind::Lit(to_literal(&v)), decl.init.pos);
        }
    }
    Ok(folded)
}

fn const_eval(scope: &Scope, e: &Expr) -> Result<Folded, Diagnostic> {
    match &e.kind {
        ExprKind::Lit(l) => Ok(Folded::Value(from_literal(l))),
        ExprKind::Name(n) => {
            if let Some(&o) = scope.levels.get(n) {
                Ok(Folded::Level(o))
            } else if let Some(f) = scope.consts.get(n) {
                Ok(f.clone())
            } else if scope.vars.contains(n) {
                Err(Diagnostic::new(
                    e.pos,
                    format!("non-constant initializer: `{n}` is a variable"),
                ))
            } else if PREDEFINED.contains(&n.as_str()) {
                Err(Diagnostic::new(
                    e.pos,
                    format!("non-constant initializer: `{n}` is not a constant"),
                ))
            } else {
                Err(Diagnostic::new(e.pos, format!("unknown identifier `{n}`")))
            }
        }
        ExprKind::Unary(op, inner) => {
            let v = const_eval(scope, inner)?.into_value();
            ops::unary(*op, &v).map(Folded::Value).map_err(|_| {
                Diagnostic::new(
                    e.pos,
                    format!("type mismatch: operator `{}` cannot be applied to {}", op.as_str(), v.value_type()),
                )
            })
        }
        ExprKind::Binary(op, l, r) => {
            let a = const_eval(scope, l)?.into_value();
            let b = const_eval(scope, r)?.into_value();
            match ops::binary(*op, &a, &b) {
                Ok(v) => Ok(Folded::Value(v)),
                Err(OpError::DivisionByZero) => Err(Diagnostic::new(e.pos, "division by zero in constant expression")),
                Err(OpError::TypeMismatch) => Err(Diagnostic::new(
                    e.pos,
                    super::binary_mismatch_message(*op, a.value_type(), b.value_type()),
                )),
            }
        }
        ExprKind::Call(name, args) => match (name.as_str(), args.as_slice()) {
            ("string", [a]) => Ok(Folded::Value(Value::string(const_eval(scope, a)?.into_value().render()))),
            ("levelname", [a]) => match const_eval(scope, a)?.into_value() {
                Value::Int(o) => {
                    let name = usize::try_from(o)
                        .ok()
                        .and_then(|o| scope.level_names.get(o))
                        .cloned()
                        .unwrap_or_default();
                    Ok(Folded::Value(Value::string(name)))
                }
                other => Err(Diagnostic::new(
                    a.pos,
                    format!("type mismatch: argument 1 of `levelname` must be int, found {}", other.value_type()),
                )),
            },
            _ => Err(Diagnostic::new(
                e.pos,
                format!("non-constant initializer: `{name}(...)` is not a constant expression"),
            )),
        },
    }
}

fn fold_rule(scope: &Scope, rule: &mut Rule) -> Result<(), Diagnostic> {
    rule.trigger = fold_expr(scope, &rule.trigger)?;
    for ChainLink { action, .. } in &mut rule.chain {
        let keep_target = action.name == "set";
        for (i, arg) in action.args.iter_mut().enumerate() {
            if keep_target && i == 0 {
                continue;
            }
            *arg = fold_expr(scope, arg)?;
        }
    }
    Ok(())
}

/// Fold a rule expression. Const names become literals; level names stay
/// names; constant operator subtrees are evaluated when their types fit.
fn fold_expr(scope: &Scope, e: &Expr) -> Result<Expr, Diagnostic> {
    let kind = match &e.kind {
        ExprKind::Lit(_) => return Ok(e.clone()),
        ExprKind::Name(n) => match scope.consts.get(n) {
            Some(Folded::Value(v)) => ExprKind::Lit(to_literal(v)),
            _ => return Ok(e.clone()),
        },
        ExprKind::Unary(op, inner) => {
            let inner = fold_expr(scope, inner)?;
            if let ExprKind::Lit(l) = &inner.kind {
                if let Ok(v) = ops::unary(*op, &from_literal(l)) {
                    return Ok(Expr::new(ExprKind::Lit(to_literal(&v)), e.pos));
                }
            }
            ExprKind::Unary(*op, Box::new(inner))
        }
        ExprKind::Binary(op, l, r) => {
            let l = fold_expr(scope, l)?;
            let r = fold_expr(scope, r)?;
            if let (ExprKind::Lit(a), ExprKind::Lit(b)) = (&l.kind, &r.kind) {
                match ops::binary(*op, &from_literal(a), &from_literal(b)) {
                    Ok(v) => return Ok(Expr::new(ExprKind::Lit(to_literal(&v)), e.pos)),
                    Err(OpError::DivisionByZero) => {
                        return Err(Diagnostic::new(e.pos, "division by zero in constant expression"))
                    }
                    Err(OpError::TypeMismatch) => {}
                }
            }
            ExprKind::Binary(*op, Box::new(l), Box::new(r))
        }
        ExprKind::Call(name, args) => {
            let args = args.iter().map(|a| fold_expr(scope, a)).collect::<Result<_, _>>()?;
            ExprKind::Call(name.clone(), args)
        }
    };
    Ok(Expr::new(kind, e.pos))
}

pub(crate) fn from_literal(l: &Literal) -> Value {
    match l {
        Literal::Int(v) => Value::Int(*v),
        Literal::Float(v) => Value::Float(*v),
        Literal::Bool(v) => Value::Bool(*v),
        Literal::Str(s) => Value::string(s.as_str()),
    }
}

pub(crate) fn to_literal(v: &Value) -> Literal {
    match v {
        Value::Int(v) => Literal::Int(*v),
        Value::Float(v) => Literal::Float(*v),
        Value::Bool(v) => Literal::Bool(*v),
        Value::Str(s) => Literal::Str(s.clone()),
    }
}
