use std::fmt;

/// 1-based line and column (columns count Unicode scalar values).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub const fn new(line: u32, col: u32) -> Self {
        Self { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    Levels,
    Consts,
    Vars,
    Rules,
    Soft,
}

impl Keyword {
    pub fn from_ident(s: &str) -> Option<Self> {
        Some(match s {
            "levels" => Self::Levels,
            "consts" => Self::Consts,
            "vars" => Self::Vars,
            "rules" => Self::Rules,
            "soft" => Self::Soft,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Levels => "levels",
            Self::Consts => "consts",
            Self::Vars => "vars",
            Self::Rules => "rules",
            Self::Soft => "soft",
        }
    }
}

/// Expression operators. The set is the C operator set without shifts,
/// assignment, the conditional operator and the comma operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    Amp,
    Pipe,
    Caret,
    AndAnd,
    OrOr,
    Bang,
    Tilde,
}

impl Op {
    pub fn as_str(self) -> &'static str {
        match self {
            Op::Plus => "+",
            Op::Minus => "-",
            Op::Star => "*",
            Op::Slash => "/",
            Op::Percent => "%",
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
            Op::EqEq => "==",
            Op::Ne => "!=",
            Op::Amp => "&",
            Op::Pipe => "|",
            Op::Caret => "^",
            Op::AndAnd => "&&",
            Op::OrOr => "||",
            Op::Bang => "!",
            Op::Tilde => "~",
        }
    }
}

/// Action chain connectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Connector {
    /// `=>`: continue when the previous action succeeded.
    OnTrue,
    /// `!>`: continue when the previous action failed.
    OnFalse,
    /// `,`: continue unconditionally.
    Always,
}

impl Connector {
    pub fn as_str(self) -> &'static str {
        match self {
            Connector::OnTrue => "=>",
            Connector::OnFalse => "!>",
            Connector::Always => ",",
        }
    }

    /// Whether the action after this connector runs, given the result of
    /// the action before it.
    #[inline]
    pub fn continues(self, previous: bool) -> bool {
        match self {
            Connector::OnTrue => previous,
            Connector::OnFalse => !previous,
            Connector::Always => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Punct {
    Colon,
    Semi,
    LParen,
    RParen,
    Question,
    Assign,
}

impl Punct {
    pub fn as_str(self) -> &'static str {
        match self {
            Punct::Colon => ":",
            Punct::Semi => ";",
            Punct::LParen => "(",
            Punct::RParen => ")",
            Punct::Question => "?",
            Punct::Assign => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident(String),
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    Op(Op),
    /// `,` is lexed as a connector; inside argument lists the parser reads
    /// it as a separator.
    Connector(Connector),
    Punct(Punct),
}

impl TokenKind {
    /// Short human description used in "expected ..." diagnostics.
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Keyword(k) => format!("keyword `{}`", k.as_str()),
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Int(v) => format!("integer `{v}`"),
            TokenKind::Float(v) => format!("float `{v:?}`"),
            TokenKind::Str(_) => "string literal".to_string(),
            TokenKind::Bool(b) => format!("`{b}`"),
            TokenKind::Op(o) => format!("`{}`", o.as_str()),
            TokenKind::Connector(c) => format!("`{}`", c.as_str()),
            TokenKind::Punct(p) => format!("`{}`", p.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Source text of the token. Unicode arrows carry their normalized ASCII
    /// spelling here.
    pub lexeme: String,
    pub pos: Pos,
}
