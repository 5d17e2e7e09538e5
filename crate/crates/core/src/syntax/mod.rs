//! Rules-file frontend: tokenizer, parser and pretty printer.

pub mod ast;
mod lexer;
mod parser;
mod printer;
pub mod token;

use std::fmt;

pub use lexer::tokenize;
pub use parser::{parse_program, MAX_DEPTH};
pub use printer::write_string_literal;
pub use token::{Pos, Token, TokenKind};

/// A lexical or syntax error. Parsing stops at the first one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
    /// Tokens that would have been accepted at `pos`, when known.
    pub expected: Vec<String>,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        Self {
            pos,
            message: message.into(),
            expected: Vec::new(),
        }
    }

    fn expected(pos: Pos, expected: Vec<String>, found: String) -> Self {
        let message = match expected.as_slice() {
            [one] => format!("expected {one}, found {found}"),
            many => format!("expected one of {}, found {found}", many.join(", ")),
        };
        Self {
            pos,
            message,
            expected,
        }
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

impl std::error::Error for SyntaxError {}

/// Tokenize and parse in one step.
pub fn parse_source(source: &str, source_name: &str) -> Result<ast::Program, SyntaxError> {
    let tokens = tokenize(source)?;
    parse_program(&tokens, source_name)
}
