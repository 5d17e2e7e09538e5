//! Tree-walking interpreter over the checked program.

use std::sync::Arc;

use super::engine::RuleEngine;
use super::env::Runtime;
use super::ops;
use super::value::Value;
use super::{Fault, Stop};
use crate::predicates::{graph, msg, EventCtx, GraphContext, MessageContext};
use crate::semantics::builtins::Builtin;
use crate::semantics::{CheckedProgram, CheckedRule, Predef, TAction, TExpr, TExprKind};
use crate::syntax::ast::{BinOp, SectionKind};

#[derive(Debug, Clone)]
pub struct Interpreter {
    program: Arc<CheckedProgram>,
    vars: Vec<Value>,
}

impl Interpreter {
    pub fn new(program: Arc<CheckedProgram>) -> Self {
        let vars = program.vars.iter().map(|v| v.init.clone()).collect();
        Self { program, vars }
    }

    pub fn program(&self) -> &CheckedProgram {
        &self.program
    }

    pub fn vars(&self) -> &[Value] {
        &self.vars
    }

    fn run_section(&mut self, kind: SectionKind, rt: &mut Runtime, ctx: EventCtx<'_>) -> Result<(), Stop> {
        let program = Arc::clone(&self.program);
        for rule in program.rules_of(kind) {
            rt.begin_rule_dyn(&rule.id);
            let r = self.run_rule(rule, rt, ctx);
            rt.settle(r)?;
        }
        Ok(())
    }

    /// Evaluate the trigger and, if it holds, run the action chain.
    pub fn run_rule(&mut self, rule: &CheckedRule, rt: &mut Runtime, ctx: EventCtx<'_>) -> Result<(), Stop> {
        if !truthy(self.eval(&rule.trigger, rt, ctx)?)? {
            return Ok(());
        }
        for link in &rule.chain {
            let r = self.action(&link.action, rt, ctx)?;
            match link.next {
                Some(c) if c.continues(r) => {}
                _ => break,
            }
        }
        Ok(())
    }

    fn action(&mut self, a: &TAction, rt: &mut Runtime, ctx: EventCtx<'_>) -> Result<bool, Stop> {
        Ok(match a {
            TAction::Set { slot, value } => {
                let v = self.eval(value, rt, ctx)?;
                self.vars[*slot] = v;
                true
            }
            TAction::Crash(e) => {
                let text = string(self.eval(e, rt, ctx)?)?;
                return Err(rt.crash(text));
            }
            TAction::Alert(e) => {
                let text = string(self.eval(e, rt, ctx)?)?;
                rt.alert(text)
            }
            TAction::Exec { program, args } => {
                let program = string(self.eval(program, rt, ctx)?)?;
                let args = args
                    .iter()
                    .map(|a| string(self.eval(a, rt, ctx)?))
                    .collect::<Result<Vec<_>, _>>()?;
                rt.exec(program, args)
            }
            TAction::Debug { result, args } => {
                let args = args
                    .iter()
                    .map(|a| Ok(self.eval(a, rt, ctx)?.render()))
                    .collect::<Result<Vec<_>, Fault>>()?;
                rt.debug(*result, &args)
            }
            TAction::Trigger(e) => {
                let target = int(self.eval(e, rt, ctx)?)?;
                rt.trigger(target)
            }
        })
    }

    /// Pure evaluation apart from the `signal` counter and plugin children.
    pub fn eval(&self, e: &TExpr, rt: &Runtime, ctx: EventCtx<'_>) -> Result<Value, Fault> {
        Ok(match &e.kind {
            TExprKind::Lit(v) => v.clone(),
            TExprKind::Level(o) => Value::Int(*o as i64),
            TExprKind::Var(slot) => self.vars[*slot].clone(),
            TExprKind::Predef(p) => match p {
                Predef::CurrLevel => Value::Int(rt.curr_level()),
                Predef::Time => Value::Int(rt.time()),
                Predef::Uptime => Value::Int(rt.uptime()),
                Predef::CurrRule => Value::string(rt.current_rule()),
            },
            TExprKind::Unary(op, inner) => ops::unary(*op, &self.eval(inner, rt, ctx)?)?,
            TExprKind::Binary(BinOp::And, l, r) => {
                Value::Bool(truthy(self.eval(l, rt, ctx)?)? && truthy(self.eval(r, rt, ctx)?)?)
            }
            TExprKind::Binary(BinOp::Or, l, r) => {
                Value::Bool(truthy(self.eval(l, rt, ctx)?)? || truthy(self.eval(r, rt, ctx)?)?)
            }
            TExprKind::Binary(op, l, r) => {
                let a = self.eval(l, rt, ctx)?;
                let b = self.eval(r, rt, ctx)?;
                ops::binary(*op, &a, &b)?
            }
            TExprKind::TopicMatches(i) => {
                Value::Bool(msg::topicmatches(msg_ctx(ctx)?, &self.program.regexes[*i].regex))
            }
            TExprKind::Payload(i) => Value::Bool(self.program.patterns[*i].set.is_match(&msg_ctx(ctx)?.payload)),
            TExprKind::Plugin(i) => Value::Bool(rt.plugin(&self.program.plugins[*i], &msg_ctx(ctx)?.payload)),
            TExprKind::Signal(s) => Value::Bool(rt.signal(*s)),
            TExprKind::Call(b, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.eval(a, rt, ctx))
                    .collect::<Result<Vec<_>, _>>()?;
                call(*b, &vals, rt, ctx)?
            }
        })
    }
}

fn truthy(v: Value) -> Result<bool, Fault> {
    v.as_bool().ok_or(Fault::TypeMismatch)
}

fn int(v: Value) -> Result<i64, Fault> {
    v.as_int().ok_or(Fault::TypeMismatch)
}

fn string(v: Value) -> Result<String, Fault> {
    match v {
        Value::Str(s) => Ok(s),
        _ => Err(Fault::TypeMismatch),
    }
}

fn msg_ctx<'a>(ctx: EventCtx<'a>) -> Result<&'a MessageContext, Fault> {
    match ctx {
        EventCtx::Msg(m) => Ok(m),
        _ => Err(Fault::TypeMismatch),
    }
}

fn graph_ctx<'a>(ctx: EventCtx<'a>) -> Result<&'a GraphContext, Fault> {
    match ctx {
        EventCtx::Graph(g) => Ok(g),
        _ => Err(Fault::TypeMismatch),
    }
}

fn strs(vals: &[Value]) -> Result<Vec<&str>, Fault> {
    vals.iter().map(|v| v.as_str().ok_or(Fault::TypeMismatch)).collect()
}

fn int_at(vals: &[Value], i: usize) -> Result<i64, Fault> {
    vals.get(i).and_then(Value::as_int).ok_or(Fault::TypeMismatch)
}

fn str_at(vals: &[Value], i: usize) -> Result<&str, Fault> {
    vals.get(i).and_then(Value::as_str).ok_or(Fault::TypeMismatch)
}

fn call(b: Builtin, v: &[Value], rt: &Runtime, ctx: EventCtx<'_>) -> Result<Value, Fault> {
    use Builtin as B;
    let bool_ = Value::Bool;
    Ok(match b {
        B::LevelName => Value::string(rt.level_name(int_at(v, 0)?)),
        B::String => Value::string(v.first().ok_or(Fault::TypeMismatch)?.render()),
        B::IdsAlert => bool_(rt.idsalert(str_at(v, 0)?)),
        B::MsgSubtype => bool_(msg::msgsubtype(msg_ctx(ctx)?, str_at(v, 0)?, str_at(v, 1)?)),
        B::MsgTypeIn => bool_(msg::msgtypein(msg_ctx(ctx)?, &strs(v)?)),
        B::TopicIn => bool_(msg::topicin(msg_ctx(ctx)?, &strs(v)?)),
        B::Publishers => bool_(msg::publishers(msg_ctx(ctx)?, &strs(v)?)),
        B::PublishersInclude => bool_(msg::publishersinclude(msg_ctx(ctx)?, &strs(v)?)),
        B::PublisherCount => bool_(msg::publishercount(msg_ctx(ctx)?, int_at(v, 0)?, int_at(v, 1)?)),
        B::Subscribers => bool_(msg::subscribers(msg_ctx(ctx)?, &strs(v)?)),
        B::SubscribersInclude => bool_(msg::subscribersinclude(msg_ctx(ctx)?, &strs(v)?)),
        B::SubscriberCount => bool_(msg::subscribercount(msg_ctx(ctx)?, int_at(v, 0)?, int_at(v, 1)?)),
        B::Nodes => bool_(graph::nodes(graph_ctx(ctx)?, &strs(v)?)),
        B::NodesInclude => bool_(graph::nodesinclude(graph_ctx(ctx)?, &strs(v)?)),
        B::NodeCount => bool_(graph::nodecount(graph_ctx(ctx)?, int_at(v, 0)?, int_at(v, 1)?)),
        B::Service => bool_(graph::service(graph_ctx(ctx)?, str_at(v, 0)?, str_at(v, 1)?)),
        B::Services => bool_(graph::services(graph_ctx(ctx)?, str_at(v, 0)?, &strs(&v[1..])?)),
        B::ServicesInclude => bool_(graph::servicesinclude(graph_ctx(ctx)?, str_at(v, 0)?, &strs(&v[1..])?)),
        B::ServiceCount => bool_(graph::servicecount(
            graph_ctx(ctx)?,
            str_at(v, 0)?,
            int_at(v, 1)?,
            int_at(v, 2)?,
        )),
        B::Topics => bool_(graph::topics(graph_ctx(ctx)?, &strs(v)?)),
        B::TopicsInclude => bool_(graph::topicsinclude(graph_ctx(ctx)?, &strs(v)?)),
        B::TopicCount => bool_(graph::topiccount(graph_ctx(ctx)?, int_at(v, 0)?, int_at(v, 1)?)),
        B::TopicPublishers => bool_(graph::topicpublishers(graph_ctx(ctx)?, str_at(v, 0)?, &strs(&v[1..])?)),
        B::TopicPublishersInclude => bool_(graph::topicpublishersinclude(
            graph_ctx(ctx)?,
            str_at(v, 0)?,
            &strs(&v[1..])?,
        )),
        B::TopicPublisherCount => bool_(graph::topicpublishercount(
            graph_ctx(ctx)?,
            str_at(v, 0)?,
            int_at(v, 1)?,
            int_at(v, 2)?,
        )),
        B::TopicSubscribers => bool_(graph::topicsubscribers(graph_ctx(ctx)?, str_at(v, 0)?, &strs(&v[1..])?)),
        B::TopicSubscribersInclude => bool_(graph::topicsubscribersinclude(
            graph_ctx(ctx)?,
            str_at(v, 0)?,
            &strs(&v[1..])?,
        )),
        B::TopicSubscriberCount => bool_(graph::topicsubscribercount(
            graph_ctx(ctx)?,
            str_at(v, 0)?,
            int_at(v, 1)?,
            int_at(v, 2)?,
        )),
        // Resource-backed builtins are lowered to dedicated nodes.
        B::TopicMatches | B::Payload | B::Plugin | B::Signal => return Err(Fault::TypeMismatch),
    })
}

impl RuleEngine for Interpreter {
    fn on_graph(&mut self, rt: &mut Runtime, g: &GraphContext) -> Result<(), Stop> {
        self.run_section(SectionKind::Graph, rt, EventCtx::Graph(g))
    }

    fn on_message(&mut self, rt: &mut Runtime, m: &MessageContext) -> Result<(), Stop> {
        self.run_section(SectionKind::Msg, rt, EventCtx::Msg(m))
    }

    fn on_tick(&mut self, rt: &mut Runtime) -> Result<(), Stop> {
        self.run_section(SectionKind::External, rt, EventCtx::External)
    }

    fn dump_vars(&self) -> Vec<(String, String)> {
        self.program
            .vars
            .iter()
            .zip(&self.vars)
            .map(|(slot, v)| (slot.name.clone(), v.dump_repr()))
            .collect()
    }
}
