use std::fmt::Write as _;

use super::{Manifest, TranspileOptions};
use crate::runtime::signals::Sig;
use crate::runtime::value::Value;
use crate::semantics::builtins::Builtin;
use crate::semantics::{CheckedProgram, CheckedRule, Predef, TAction, TExpr, TExprKind, ValueType};
use crate::syntax::ast::{BinOp, Connector, SectionKind, UnOp};

const ALLOW: &str = "#[allow(unused_variables, unused_parens, unreachable_code, clippy::all)]";

/// A Rust string literal denoting exactly `s`.
pub fn rust_string_literal(s: &str) -> String {
    format!("{s:?}")
}

/// One line of a `//` comment; line breaks cannot end the comment early.
fn comment_text(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

pub(super) fn emit(p: &CheckedProgram, m: &Manifest, opts: &TranspileOptions) -> String {
    let mut e = Emitter {
        p,
        out: String::with_capacity(16 * 1024),
    };
    e.header(m, opts);
    e.tables(m);
    e.state();
    e.rules();
    e.engine();
    if opts.with_main {
        e.line("");
        e.line("fn main() {");
        e.line("    std::process::exit(generated_main(spec()));");
        e.line("}");
    }
    e.out
}

struct Emitter<'a> {
    p: &'a CheckedProgram,
    out: String,
}

/// A generated Rust expression. String-valued code is either an owned
/// `String` or a borrowed `&str`.
struct Code {
    text: String,
    ty: ValueType,
    owned: bool,
}

impl Code {
    fn new(text: impl Into<String>, ty: ValueType) -> Self {
        Self {
            text: text.into(),
            ty,
            owned: false,
        }
    }

    fn owned(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            ty: ValueType::String,
            owned: true,
        }
    }

    fn as_str(&self) -> String {
        if self.owned {
            format!("({}).as_str()", self.text)
        } else {
            self.text.clone()
        }
    }

    fn into_string(self) -> String {
        if self.owned {
            self.text
        } else {
            format!("String::from({})", self.text)
        }
    }

    /// The value as a `String` the way `string(...)` renders it.
    fn rendered(self) -> String {
        match self.ty {
            ValueType::Int => format!("render_int({})", self.text),
            ValueType::Float => format!("render_float({})", self.text),
            ValueType::Bool => format!("render_bool({})", self.text),
            _ => self.into_string(),
        }
    }
}

fn rust_type(t: ValueType) -> &'static str {
    match t {
        ValueType::Int => "i64",
        ValueType::Float => "f64",
        ValueType::Bool => "bool",
        _ => "String",
    }
}

fn int_lit(v: i64) -> String {
    match v {
        i64::MIN => "i64::MIN".to_string(),
        v if v < 0 => format!("({v}i64)"),
        v => format!("{v}i64"),
    }
}

fn float_lit(v: f64) -> String {
    if v.is_nan() {
        "f64::NAN".to_string()
    } else if v == f64::INFINITY {
        "f64::INFINITY".to_string()
    } else if v == f64::NEG_INFINITY {
        "f64::NEG_INFINITY".to_string()
    } else if v.is_sign_negative() {
        format!("({v:?}f64)")
    } else {
        format!("{v:?}f64")
    }
}

fn value_code(v: &Value) -> Code {
    match v {
        Value::Int(i) => Code::new(int_lit(*i), ValueType::Int),
        Value::Float(f) => Code::new(float_lit(*f), ValueType::Float),
        Value::Bool(b) => Code::new(b.to_string(), ValueType::Bool),
        Value::Str(s) => Code::new(rust_string_literal(s), ValueType::String),
    }
}

fn sig_code(s: Sig) -> &'static str {
    match s {
        Sig::Usr1 => "Sig::Usr1",
        Sig::Usr2 => "Sig::Usr2",
    }
}

fn ctx_param(kind: SectionKind) -> &'static str {
    match kind {
        SectionKind::Graph => ", g: &GraphContext",
        SectionKind::Msg => ", m: &MessageContext",
        SectionKind::External => "",
    }
}

fn ctx_arg(kind: SectionKind) -> &'static str {
    match kind {
        SectionKind::Graph => ", g",
        SectionKind::Msg => ", m",
        SectionKind::External => "",
    }
}

impl Emitter<'_> {
    fn line(&mut self, s: &str) {
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn header(&mut self, m: &Manifest, opts: &TranspileOptions) {
        let _ = writeln!(self.out, "// Rules engine generated by rips {}.", m.engine_version);
        let _ = writeln!(self.out, "// source: {}", comment_text(&m.source));
        let _ = writeln!(self.out, "// generated-at: {}", m.generated_at);
        let _ = writeln!(
            self.out,
            "// scripts: {}",
            m.scripts_dir.as_deref().map_or("(none)".to_string(), comment_text)
        );
        if opts.with_main {
            self.line("");
            self.line(&ALLOW.replacen("#[", "#![", 1));
        }
        self.line("");
        let _ = writeln!(self.out, "use {}::support::*;", opts.crate_path);
        self.line("");
    }

    fn tables(&mut self, m: &Manifest) {
        let p = self.p;
        let _ = writeln!(self.out, "pub const SOURCE_NAME: &str = {};", rust_string_literal(&m.source));
        let scripts = match &m.scripts_dir {
            Some(d) => format!("Some({})", rust_string_literal(d)),
            None => "None".to_string(),
        };
        let _ = writeln!(self.out, "pub const SCRIPTS_DIR: Option<&str> = {scripts};");
        let _ = writeln!(self.out, "pub const RULE_COUNT: usize = {};", p.rules.len());
        self.line("");
        self.line("pub fn levels() -> Vec<LevelSpec> {");
        if p.levels.is_empty() {
            self.line("    Vec::new()");
        } else {
            self.line("    vec![");
            for l in &p.levels {
                let _ = writeln!(
                    self.out,
                    "        LevelSpec::new({}, {}),",
                    rust_string_literal(&l.name),
                    l.soft
                );
            }
            self.line("    ]");
        }
        self.line("}");
        self.line("");
        self.line("pub fn spec() -> GeneratedSpec<Rules> {");
        self.line("    GeneratedSpec {");
        self.line("        source_name: SOURCE_NAME,");
        self.line("        levels,");
        self.line("        scripts_dir: SCRIPTS_DIR,");
        self.line("        load: Rules::load,");
        self.line("    }");
        self.line("}");
        self.line("");
    }

    fn state(&mut self) {
        let p = self.p;
        self.line("pub struct Rules {");
        for (i, v) in p.vars.iter().enumerate() {
            let _ = writeln!(self.out, "    /// {}", comment_text(&v.name));
            let _ = writeln!(self.out, "    v{i}: {},", rust_type(v.ty));
        }
        for (i, r) in p.regexes.iter().enumerate() {
            let _ = writeln!(self.out, "    /// topicmatches({})", comment_text(&rust_string_literal(&r.source)));
            let _ = writeln!(self.out, "    re{i}: Regex,");
        }
        for i in 0..p.patterns.len() {
            let _ = writeln!(self.out, "    pat{i}: PatternSet,");
        }
        for i in 0..p.plugins.len() {
            let _ = writeln!(self.out, "    plugin{i}: &'static std::path::Path,");
        }
        self.line("}");
        self.line("");
        self.line(ALLOW);
        self.line("impl Rules {");
        self.line("    /// Initial variable values plus every resource, validated.");
        self.line("    pub fn load() -> Result<Self, String> {");
        self.line("        Ok(Self {");
        for (i, v) in p.vars.iter().enumerate() {
            let init = value_code(&v.init);
            let text = if v.ty == ValueType::String {
                init.into_string()
            } else {
                init.text
            };
            let _ = writeln!(self.out, "            v{i}: {text},");
        }
        for (i, r) in p.regexes.iter().enumerate() {
            let _ = writeln!(self.out, "            re{i}: regex({})?,", rust_string_literal(&r.source));
        }
        for (i, pat) in p.patterns.iter().enumerate() {
            let _ = writeln!(
                self.out,
                "            pat{i}: patterns({})?,",
                rust_string_literal(&pat.path.to_string_lossy())
            );
        }
        for (i, plug) in p.plugins.iter().enumerate() {
            let _ = writeln!(
                self.out,
                "            plugin{i}: plugin({})?,",
                rust_string_literal(&plug.to_string_lossy())
            );
        }
        self.line("        })");
        self.line("    }");
    }

    fn rules(&mut self) {
        let p = self.p;
        for (i, r) in p.rules.iter().enumerate() {
            self.line("");
            self.rule(i, r);
        }
        self.line("}");
        self.line("");
    }

    fn rule(&mut self, index: usize, r: &CheckedRule) {
        let _ = writeln!(self.out, "    /// {} (line {})", comment_text(&r.id), r.pos.line);
        let _ = writeln!(
            self.out,
            "    fn rule_{index}(&mut self, rt: &mut Runtime{}) -> Result<(), Stop> {{",
            ctx_param(r.kind)
        );
        let trigger = self.expr(&r.trigger);
        let _ = writeln!(self.out, "        if !{} {{", paren(&trigger.text));
        self.line("            return Ok(());");
        self.line("        }");
        for link in &r.chain {
            if let TAction::Crash(msg) = &link.action {
                let msg = self.expr(msg).into_string();
                let _ = writeln!(self.out, "        let a0: String = {msg};");
                self.line("        return Err(rt.crash(a0));");
                self.line("    }");
                return;
            }
            let block = self.action(&link.action);
            match link.next {
                Some(Connector::OnTrue) => {
                    let _ = writeln!(self.out, "        let r = {block};");
                    self.line("        if !r {");
                    self.line("            return Ok(());");
                    self.line("        }");
                }
                Some(Connector::OnFalse) => {
                    let _ = writeln!(self.out, "        let r = {block};");
                    self.line("        if r {");
                    self.line("            return Ok(());");
                    self.line("        }");
                }
                Some(Connector::Always) | None => {
                    let _ = writeln!(self.out, "        let _ = {block};");
                }
            }
        }
        self.line("        Ok(())");
        self.line("    }");
    }

    /// A block expression of type `bool` performing the action.
    fn action(&mut self, a: &TAction) -> String {
        let mut s = String::from("{\n");
        let bind = |s: &mut String, i: usize, ty: &str, code: String| {
            let _ = writeln!(s, "            let a{i}: {ty} = {code};");
        };
        let call = match a {
            TAction::Set { slot, value } => {
                let c = self.expr(value);
                let ty = rust_type(c.ty);
                let text = if c.ty == ValueType::String { c.into_string() } else { c.text };
                bind(&mut s, 0, ty, text);
                let _ = writeln!(s, "            self.v{slot} = a0;");
                "true".to_string()
            }
            TAction::Alert(e) => {
                bind(&mut s, 0, "String", self.expr(e).into_string());
                "rt.alert(a0)".to_string()
            }
            TAction::Exec { program, args } => {
                bind(&mut s, 0, "String", self.expr(program).into_string());
                for (i, arg) in args.iter().enumerate() {
                    bind(&mut s, i + 1, "String", self.expr(arg).into_string());
                }
                let argv: Vec<String> = (1..=args.len()).map(|i| format!("a{i}")).collect();
                format!("rt.exec(a0, vec![{}])", argv.join(", "))
            }
            TAction::Debug { result, args } => {
                for (i, arg) in args.iter().enumerate() {
                    bind(&mut s, i, "String", self.expr(arg).rendered());
                }
                let argv: Vec<String> = (0..args.len()).map(|i| format!("a{i}")).collect();
                format!("rt.debug({result}, &[{}])", argv.join(", "))
            }
            TAction::Trigger(e) => {
                bind(&mut s, 0, "i64", self.expr(e).text);
                "rt.trigger(a0)".to_string()
            }
            TAction::Crash(_) => unreachable!("crash is lowered by the chain"),
        };
        let _ = writeln!(s, "            {call}");
        s.push_str("        }");
        s
    }

    fn expr(&mut self, e: &TExpr) -> Code {
        let ty = e.ty.value;
        match &e.kind {
            TExprKind::Lit(v) => value_code(v),
            TExprKind::Level(o) => Code::new(int_lit(*o as i64), ValueType::Int),
            TExprKind::Var(slot) => {
                if ty == ValueType::String {
                    Code::new(format!("self.v{slot}.as_str()"), ty)
                } else {
                    Code::new(format!("self.v{slot}"), ty)
                }
            }
            TExprKind::Predef(p) => match p {
                Predef::CurrLevel => Code::new("rt.curr_level()", ValueType::Int),
                Predef::Time => Code::new("rt.time()", ValueType::Int),
                Predef::Uptime => Code::new("rt.uptime()", ValueType::Int),
                Predef::CurrRule => Code::new("rt.current_rule()", ValueType::String),
            },
            TExprKind::Unary(op, inner) => {
                let c = self.expr(inner);
                let text = match (op, c.ty) {
                    (UnOp::Not | UnOp::BitNot, _) => format!("(!{})", paren(&c.text)),
                    (UnOp::Neg, ValueType::Int) => format!("{}.wrapping_neg()", paren(&c.text)),
                    (UnOp::Neg, _) => format!("(-{})", paren(&c.text)),
                    (UnOp::Plus, _) => c.text,
                };
                Code::new(text, ty)
            }
            TExprKind::Binary(op, l, r) => self.binary(*op, l, r, ty),
            TExprKind::TopicMatches(i) => Code::new(format!("msg::topicmatches(m, &self.re{i})"), ty),
            TExprKind::Payload(i) => Code::new(format!("self.pat{i}.is_match(&m.payload)"), ty),
            TExprKind::Plugin(i) => Code::new(format!("rt.plugin(self.plugin{i}, &m.payload)"), ty),
            TExprKind::Signal(s) => Code::new(format!("rt.signal({})", sig_code(*s)), ty),
            TExprKind::Call(b, args) => self.call(*b, args, ty),
        }
    }

    fn binary(&mut self, op: BinOp, l: &TExpr, r: &TExpr, ty: ValueType) -> Code {
        let a = self.expr(l);
        let b = self.expr(r);
        let infix = |sym: &str, a: &str, b: &str| format!("({} {sym} {})", paren(a), paren(b));
        let text = match (op, a.ty) {
            (BinOp::And, _) => infix("&&", &a.text, &b.text),
            (BinOp::Or, _) => infix("||", &a.text, &b.text),
            (BinOp::Add, ValueType::String) => return Code::owned(format!("concat({}, {})", a.into_string(), b.as_str())),
            (_, ValueType::String) => infix(op.as_str(), &a.as_str(), &b.as_str()),
            (BinOp::Add, ValueType::Int) => format!("{}.wrapping_add({})", paren(&a.text), b.text),
            (BinOp::Sub, ValueType::Int) => format!("{}.wrapping_sub({})", paren(&a.text), b.text),
            (BinOp::Mul, ValueType::Int) => format!("{}.wrapping_mul({})", paren(&a.text), b.text),
            (BinOp::Div, ValueType::Int) => format!("int_div({}, {})?", a.text, b.text),
            (BinOp::Rem, ValueType::Int) => format!("int_rem({}, {})?", a.text, b.text),
            _ => infix(op.as_str(), &a.text, &b.text),
        };
        Code::new(text, ty)
    }

    fn call(&mut self, b: Builtin, args: &[TExpr], ty: ValueType) -> Code {
        use Builtin as B;
        let mut codes: Vec<Code> = args.iter().map(|a| self.expr(a)).collect();
        let strs = |codes: &[Code]| {
            let items: Vec<String> = codes.iter().map(Code::as_str).collect();
            format!("&[{}]", items.join(", "))
        };
        let name = b.name();
        let text = match b {
            B::LevelName => return Code::owned(format!("rt.level_name({})", codes[0].text)),
            B::String => return Code::owned(codes.remove(0).rendered()),
            B::IdsAlert => format!("rt.idsalert({})", codes[0].as_str()),
            B::MsgSubtype => format!("msg::{name}(m, {}, {})", codes[0].as_str(), codes[1].as_str()),
            B::MsgTypeIn | B::TopicIn | B::Publishers | B::PublishersInclude | B::Subscribers | B::SubscribersInclude => {
                format!("msg::{name}(m, {})", strs(&codes))
            }
            B::PublisherCount | B::SubscriberCount => format!("msg::{name}(m, {}, {})", codes[0].text, codes[1].text),
            B::Nodes | B::NodesInclude | B::Topics | B::TopicsInclude => format!("graph::{name}(g, {})", strs(&codes)),
            B::NodeCount | B::TopicCount => format!("graph::{name}(g, {}, {})", codes[0].text, codes[1].text),
            B::Service => format!("graph::{name}(g, {}, {})", codes[0].as_str(), codes[1].as_str()),
            B::Services
            | B::ServicesInclude
            | B::TopicPublishers
            | B::TopicPublishersInclude
            | B::TopicSubscribers
            | B::TopicSubscribersInclude => {
                format!("graph::{name}(g, {}, {})", codes[0].as_str(), strs(&codes[1..]))
            }
            B::ServiceCount | B::TopicPublisherCount | B::TopicSubscriberCount => format!(
                "graph::{name}(g, {}, {}, {})",
                codes[0].as_str(),
                codes[1].text,
                codes[2].text
            ),
            B::TopicMatches | B::Payload | B::Plugin | B::Signal => {
                unreachable!("resource builtins are lowered by the checker")
            }
        };
        Code::new(text, ty)
    }

    fn engine(&mut self) {
        let p = self.p;
        self.line(ALLOW);
        self.line("impl RuleEngine for Rules {");
        for (method, kind) in [
            ("on_graph", SectionKind::Graph),
            ("on_message", SectionKind::Msg),
            ("on_tick", SectionKind::External),
        ] {
            let _ = writeln!(
                self.out,
                "    fn {method}(&mut self, rt: &mut Runtime{}) -> Result<(), Stop> {{",
                ctx_param(kind)
            );
            for (i, r) in p.rules.iter().enumerate().filter(|(_, r)| r.kind == kind) {
                let _ = writeln!(self.out, "        rt.begin_rule({});", rust_string_literal(&r.id));
                let _ = writeln!(self.out, "        let r = self.rule_{i}(rt{});", ctx_arg(kind));
                self.line("        rt.settle(r)?;");
            }
            self.line("        Ok(())");
            self.line("    }");
            self.line("");
        }
        self.line("    fn dump_vars(&self) -> Vec<(String, String)> {");
        if p.vars.is_empty() {
            self.line("        Vec::new()");
        } else {
            self.line("        vec![");
            for (i, v) in p.vars.iter().enumerate() {
                let value = match v.ty {
                    ValueType::Int => format!("render_int(self.v{i})"),
                    ValueType::Float => format!("render_float(self.v{i})"),
                    ValueType::Bool => format!("render_bool(self.v{i})"),
                    _ => format!("dump_str(&self.v{i})"),
                };
                let _ = writeln!(
                    self.out,
                    "            ({}.to_string(), {value}),",
                    rust_string_literal(&v.name)
                );
            }
            self.line("        ]");
        }
        self.line("    }");
        self.line("}");
    }
}

/// Parenthesize unless `s` is already atomic.
fn paren(s: &str) -> String {
    let atomic = s.starts_with('(') && s.ends_with(')') && balanced_outer(s)
        || s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.');
    if atomic {
        s.to_string()
    } else {
        format!("({s})")
    }
}

/// True when the first `(` closes at the last character.
fn balanced_outer(s: &str) -> bool {
    let mut depth = 0usize;
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if in_str {
            match (escaped, c) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_str = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_str = true,
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return i == s.len() - 1;
                }
            }
            _ => {}
        }
    }
    false
}
