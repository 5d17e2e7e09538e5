//! Recursive descent parser for rules files, with Pratt-style parsing of
//! expressions at C precedence.

use std::collections::HashMap;

use super::ast::*;
use super::token::{Keyword, Op, Punct, Token, TokenKind};
use super::SyntaxError;

/// Maximum expression nesting depth.
pub const MAX_DEPTH: usize = 256;

/// Parse a token stream. `source_name` is used to build rule ids.
pub fn parse_program(tokens: &[Token], source_name: &str) -> Result<Program, SyntaxError> {
    Parser {
        tokens,
        cursor: 0,
        depth: 0,
        source_name,
        level_count: 0,
        level_names: HashMap::new(),
        rule_counts: HashMap::new(),
    }
    .program()
}

struct Parser<'t> {
    tokens: &'t [Token],
    cursor: usize,
    depth: usize,
    source_name: &'t str,
    level_count: usize,
    level_names: HashMap<String, Pos>,
    rule_counts: HashMap<SectionKind, usize>,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.cursor)
    }

    fn peek_kind(&self) -> Option<&'t TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn bump(&mut self) -> Option<&'t Token> {
        let t = self.tokens.get(self.cursor);
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    /// Position for errors at the current token, or just past the last one.
    fn here(&self) -> Pos {
        match self.peek() {
            Some(t) => t.pos,
            None => self
                .tokens
                .last()
                .map(|t| Pos::new(t.pos.line, t.pos.col + t.lexeme.chars().count() as u32))
                .unwrap_or(Pos::new(1, 1)),
        }
    }

    fn unexpected(&self, expected: &[&str]) -> SyntaxError {
        let found = self
            .peek()
            .map(|t| t.kind.describe())
            .unwrap_or_else(|| "end of file".to_string());
        SyntaxError::expected(self.here(), expected.iter().map(|s| s.to_string()).collect(), found)
    }

    fn eat_punct(&mut self, p: Punct) -> bool {
        if self.peek_kind() == Some(&TokenKind::Punct(p)) {
            self.cursor += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: Punct) -> Result<Pos, SyntaxError> {
        let pos = self.here();
        if self.eat_punct(p) {
            Ok(pos)
        } else {
            Err(self.unexpected(&[&format!("`{}`", p.as_str())]))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, Pos), SyntaxError> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Ident(name),
                pos,
                ..
            }) => {
                self.cursor += 1;
                Ok((name.clone(), *pos))
            }
            _ => Err(self.unexpected(&[what])),
        }
    }

    fn at_section_start(&self) -> bool {
        matches!(
            self.peek_kind(),
            None | Some(TokenKind::Keyword(Keyword::Levels | Keyword::Consts | Keyword::Vars | Keyword::Rules))
        )
    }

    fn program(mut self) -> Result<Program, SyntaxError> {
        let mut sections = Vec::new();
        while let Some(tok) = self.peek() {
            let pos = tok.pos;
            let section = match tok.kind {
                TokenKind::Keyword(Keyword::Levels) => {
                    self.bump();
                    self.expect_punct(Punct::Colon)?;
                    Section::Levels {
                        pos,
                        levels: self.levels()?,
                    }
                }
                TokenKind::Keyword(Keyword::Consts) => {
                    self.bump();
                    self.expect_punct(Punct::Colon)?;
                    Section::Consts {
                        pos,
                        consts: self.decls()?,
                    }
                }
                TokenKind::Keyword(Keyword::Vars) => {
                    self.bump();
                    self.expect_punct(Punct::Colon)?;
                    Section::Vars {
                        pos,
                        vars: self.decls()?,
                    }
                }
                TokenKind::Keyword(Keyword::Rules) => {
                    self.bump();
                    let kind = match self.peek_kind() {
                        Some(TokenKind::Ident(k)) => SectionKind::from_ident(k),
                        _ => None,
                    }
                    .ok_or_else(|| self.unexpected(&["`Graph`", "`Msg`", "`External`"]))?;
                    self.bump();
                    self.expect_punct(Punct::Colon)?;
                    Section::Rules(RuleSection {
                        kind,
                        rules: self.rules(kind)?,
                        pos,
                    })
                }
                _ => return Err(self.unexpected(&["`levels`", "`consts`", "`vars`", "`rules`"])),
            };
            sections.push(section);
        }
        Ok(Program { sections })
    }

    fn levels(&mut self) -> Result<Vec<LevelDecl>, SyntaxError> {
        let mut out = Vec::new();
        while !self.at_section_start() {
            let (name, pos) = self.expect_ident("level name")?;
            let soft = if self.peek_kind() == Some(&TokenKind::Keyword(Keyword::Soft)) {
                self.bump();
                true
            } else {
                false
            };
            if !self.eat_punct(Punct::Semi) {
                return Err(self.unexpected(&["`soft`", "`;`"]));
            }
            if let Some(prev) = self.level_names.get(&name) {
                return Err(SyntaxError::new(
                    pos,
                    format!("duplicate level `{name}` (first declared at {prev})"),
                ));
            }
            self.level_names.insert(name.clone(), pos);
            out.push(LevelDecl {
                name,
                soft,
                ordinal: self.level_count,
                pos,
            });
            self.level_count += 1;
        }
        Ok(out)
    }

    fn decls(&mut self) -> Result<Vec<ConstDecl>, SyntaxError> {
        let mut out = Vec::new();
        while !self.at_section_start() {
            let (name, pos) = self.expect_ident("name")?;
            let ty = match self.peek_kind() {
                Some(TokenKind::Ident(t)) => DeclType::from_ident(t),
                _ => None,
            }
            .ok_or_else(|| self.unexpected(&["`int`", "`float`", "`bool`", "`string`"]))?;
            self.bump();
            self.expect_punct(Punct::Assign)?;
            let init = self.expr()?;
            self.expect_punct(Punct::Semi)?;
            out.push(ConstDecl { name, ty, init, pos });
        }
        Ok(out)
    }

    fn rules(&mut self, kind: SectionKind) -> Result<Vec<Rule>, SyntaxError> {
        let mut out = Vec::new();
        while !self.at_section_start() {
            let pos = self.here();
            let trigger = self.expr()?;
            if !self.eat_punct(Punct::Question) {
                return Err(self.unexpected(&["`?`", "binary operator"]));
            }
            let mut chain = vec![ChainLink {
                action: self.action()?,
                next: None,
            }];
            loop {
                match self.peek_kind() {
                    Some(TokenKind::Connector(c)) => {
                        let c = *c;
                        self.bump();
                        chain.last_mut().expect("chain is non-empty").next = Some(c);
                        chain.push(ChainLink {
                            action: self.action()?,
                            next: None,
                        });
                    }
                    Some(TokenKind::Punct(Punct::Semi)) => {
                        self.bump();
                        break;
                    }
                    _ => return Err(self.unexpected(&["`=>`", "`!>`", "`,`", "`;`"])),
                }
            }
            let index = self.rule_counts.entry(kind).or_insert(0);
            let id = format!("{}:{}:{}", self.source_name, kind, index);
            *index += 1;
            out.push(Rule {
                id,
                trigger,
                chain,
                pos,
            });
        }
        Ok(out)
    }

    fn action(&mut self) -> Result<Action, SyntaxError> {
        let (name, pos) = self.expect_ident("action")?;
        self.expect_punct(Punct::LParen)?;
        let args = self.args()?;
        Ok(Action { name, args, pos })
    }

    /// Argument list after the opening parenthesis, through the closing one.
    fn args(&mut self) -> Result<Vec<Expr>, SyntaxError> {
        let mut args = Vec::new();
        if self.eat_punct(Punct::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            match self.peek_kind() {
                Some(TokenKind::Connector(Connector::Always)) => {
                    self.bump();
                }
                Some(TokenKind::Punct(Punct::RParen)) => {
                    self.bump();
                    return Ok(args);
                }
                _ => return Err(self.unexpected(&["`,`", "`)`"])),
            }
        }
    }

    pub fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.binary(0)
    }

    fn enter(&mut self) -> Result<(), SyntaxError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(SyntaxError::new(
                self.here(),
                format!("expression nesting exceeds {MAX_DEPTH} levels"),
            ));
        }
        Ok(())
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, SyntaxError> {
        self.enter()?;
        let mut lhs = self.unary()?;
        while let Some(op) = self.peek_kind().and_then(binop_of) {
            let prec = op.precedence();
            if prec <= min_prec {
                break;
            }
            let pos = self.here();
            self.bump();
            let rhs = self.binary(prec)?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos);
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        let op = match self.peek_kind() {
            Some(TokenKind::Op(Op::Bang)) => Some(UnOp::Not),
            Some(TokenKind::Op(Op::Minus)) => Some(UnOp::Neg),
            Some(TokenKind::Op(Op::Plus)) => Some(UnOp::Plus),
            Some(TokenKind::Op(Op::Tilde)) => Some(UnOp::BitNot),
            _ => None,
        };
        match op {
            Some(op) => {
                let pos = self.here();
                self.bump();
                self.enter()?;
                let inner = self.unary()?;
                self.depth -= 1;
                Ok(Expr::new(ExprKind::Unary(op, Box::new(inner)), pos))
            }
            None => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        let Some(tok) = self.peek() else {
            return Err(self.unexpected(&["expression"]));
        };
        let pos = tok.pos;
        let kind = match &tok.kind {
            TokenKind::Int(v) => ExprKind::Lit(Literal::Int(*v)),
            TokenKind::Float(v) => ExprKind::Lit(Literal::Float(*v)),
            TokenKind::Bool(v) => ExprKind::Lit(Literal::Bool(*v)),
            TokenKind::Str(s) => ExprKind::Lit(Literal::Str(s.clone())),
            TokenKind::Ident(name) => {
                self.bump();
                if self.eat_punct(Punct::LParen) {
                    let args = self.args()?;
                    return Ok(Expr::new(ExprKind::Call(name.clone(), args), pos));
                }
                return Ok(Expr::new(ExprKind::Name(name.clone()), pos));
            }
            TokenKind::Punct(Punct::LParen) => {
                self.bump();
                let inner = self.expr()?;
                self.expect_punct(Punct::RParen)?;
                return Ok(inner);
            }
            _ => return Err(self.unexpected(&["expression"])),
        };
        self.bump();
        Ok(Expr::new(kind, pos))
    }
}

fn binop_of(kind: &TokenKind) -> Option<BinOp> {
    let TokenKind::Op(op) = kind else { return None };
    Some(match op {
        Op::Star => BinOp::Mul,
        Op::Slash => BinOp::Div,
        Op::Percent => BinOp::Rem,
        Op::Plus => BinOp::Add,
        Op::Minus => BinOp::Sub,
        Op::Lt => BinOp::Lt,
        Op::Le => BinOp::Le,
        Op::Gt => BinOp::Gt,
        Op::Ge => BinOp::Ge,
        Op::EqEq => BinOp::Eq,
        Op::Ne => BinOp::Ne,
        Op::Amp => BinOp::BitAnd,
        Op::Caret => BinOp::BitXor,
        Op::Pipe => BinOp::BitOr,
        Op::AndAnd => BinOp::And,
        Op::OrOr => BinOp::Or,
        Op::Bang | Op::Tilde => return None,
    })
}
