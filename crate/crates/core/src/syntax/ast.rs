use std::fmt;

pub use super::token::{Connector, Pos};

/// Section kind of a `rules` section; also the event kind that drives it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SectionKind {
    Graph,
    Msg,
    External,
}

impl SectionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SectionKind::Graph => "Graph",
            SectionKind::Msg => "Msg",
            SectionKind::External => "External",
        }
    }

    pub fn from_ident(s: &str) -> Option<Self> {
        match s {
            "Graph" => Some(Self::Graph),
            "Msg" => Some(Self::Msg),
            "External" => Some(Self::External),
            _ => None,
        }
    }
}

impl fmt::Display for SectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Declared value type of a const or var.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeclType {
    Int,
    Float,
    Bool,
    String,
}

impl DeclType {
    pub fn from_ident(s: &str) -> Option<Self> {
        Some(match s {
            "int" => Self::Int,
            "float" => Self::Float,
            "bool" => Self::Bool,
            "string" => Self::String,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DeclType::Int => "int",
            DeclType::Float => "float",
            DeclType::Bool => "bool",
            DeclType::String => "string",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    /// Sections in source order.
    pub sections: Vec<Section>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Section {
    Levels { pos: Pos, levels: Vec<LevelDecl> },
    Consts { pos: Pos, consts: Vec<ConstDecl> },
    Vars { pos: Pos, vars: Vec<VarDecl> },
    Rules(RuleSection),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelDecl {
    pub name: String,
    pub soft: bool,
    /// Zero-based index over all `levels` sections in declaration order.
    pub ordinal: usize,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstDecl {
    pub name: String,
    pub ty: DeclType,
    pub init: Expr,
    pub pos: Pos,
}

/// Vars share the shape of consts; only mutability differs.
pub type VarDecl = ConstDecl;

#[derive(Debug, Clone, PartialEq)]
pub struct RuleSection {
    pub kind: SectionKind,
    pub rules: Vec<Rule>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    /// `<source>:<kind>:<index within kind>`, unique within a file.
    pub id: String,
    pub trigger: Expr,
    pub chain: Vec<ChainLink>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainLink {
    pub action: Action,
    /// Connector to the next action; `None` on the last link.
    pub next: Option<Connector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub name: String,
    pub args: Vec<Expr>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Lit(Literal),
    /// Unresolved name: const, var, level or predefined.
    Name(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
    Plus,
    BitNot,
}

impl UnOp {
    pub fn as_str(self) -> &'static str {
        match self {
            UnOp::Not => "!",
            UnOp::Neg => "-",
            UnOp::Plus => "+",
            UnOp::BitNot => "~",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Mul,
    Div,
    Rem,
    Add,
    Sub,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    BitAnd,
    BitXor,
    BitOr,
    And,
    Or,
}

impl BinOp {
    pub fn as_str(self) -> &'static str {
        match self {
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::BitAnd => "&",
            BinOp::BitXor => "^",
            BinOp::BitOr => "|",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// C binding power; higher binds tighter. All binary operators are
    /// left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::BitOr => 3,
            BinOp::BitXor => 4,
            BinOp::BitAnd => 5,
            BinOp::Eq | BinOp::Ne => 6,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 7,
            BinOp::Add | BinOp::Sub => 8,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 9,
        }
    }

    pub const ALL: [BinOp; 16] = [
        BinOp::Mul,
        BinOp::Div,
        BinOp::Rem,
        BinOp::Add,
        BinOp::Sub,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::BitAnd,
        BinOp::BitXor,
        BinOp::BitOr,
        BinOp::And,
        BinOp::Or,
    ];
}

/// Precedence of prefix operators; above every binary operator.
pub const UNARY_PRECEDENCE: u8 = 10;

impl Expr {
    pub fn new(kind: ExprKind, pos: Pos) -> Self {
        Self { kind, pos }
    }
}

impl Program {
    pub fn levels(&self) -> impl Iterator<Item = &LevelDecl> {
        self.sections.iter().flat_map(|s| match s {
            Section::Levels { levels, .. } => levels.as_slice(),
            _ => &[],
        })
    }

    pub fn consts(&self) -> impl Iterator<Item = &ConstDecl> {
        self.sections.iter().flat_map(|s| match s {
            Section::Consts { consts, .. } => consts.as_slice(),
            _ => &[],
        })
    }

    pub fn vars(&self) -> impl Iterator<Item = &VarDecl> {
        self.sections.iter().flat_map(|s| match s {
            Section::Vars { vars, .. } => vars.as_slice(),
            _ => &[],
        })
    }

    pub fn rule_sections(&self) -> impl Iterator<Item = &RuleSection> {
        self.sections.iter().filter_map(|s| match s {
            Section::Rules(r) => Some(r),
            _ => None,
        })
    }

    pub fn rules(&self, kind: SectionKind) -> impl Iterator<Item = &Rule> {
        self.rule_sections()
            .filter(move |s| s.kind == kind)
            .flat_map(|s| s.rules.iter())
    }

    /// Copy of the program with every position reset, for structural
    /// comparisons that should ignore layout.
    pub fn without_positions(&self) -> Program {
        let mut p = self.clone();
        let zero = Pos::default();
        for s in &mut p.sections {
            match s {
                Section::Levels { pos, levels } => {
                    *pos = zero;
                    levels.iter_mut().for_each(|l| l.pos = zero);
                }
                Section::Consts { pos, consts: decls } | Section::Vars { pos, vars: decls } => {
                    *pos = zero;
                    for d in decls {
                        d.pos = zero;
                        d.init.clear_positions();
                    }
                }
                Section::Rules(r) => {
                    r.pos = zero;
                    for rule in &mut r.rules {
                        rule.pos = zero;
                        rule.trigger.clear_positions();
                        for link in &mut rule.chain {
                            link.action.pos = zero;
                            link.action.args.iter_mut().for_each(Expr::clear_positions);
                        }
                    }
                }
            }
        }
        p
    }
}

impl Expr {
    fn clear_positions(&mut self) {
        self.pos = Pos::default();
        match &mut self.kind {
            ExprKind::Lit(_) | ExprKind::Name(_) => {}
            ExprKind::Unary(_, e) => e.clear_positions(),
            ExprKind::Binary(_, l, r) => {
                l.clear_positions();
                r.clear_positions();
            }
            ExprKind::Call(_, args) => args.iter_mut().for_each(Expr::clear_positions),
        }
    }

    /// Visit this expression and all its descendants, parents first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Lit(_) | ExprKind::Name(_) => {}
            ExprKind::Unary(_, e) => e.walk(f),
            ExprKind::Binary(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            ExprKind::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
        }
    }
}
