//! Tokenizer for rules files.

use super::token::{Connector, Keyword, Op, Pos, Punct, Token, TokenKind};
use super::SyntaxError;

pub fn tokenize(source: &str) -> Result<Vec<Token>, SyntaxError> {
    Lexer::new(source).run()
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: u32,
    col: u32,
    out: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            chars: src.char_indices().peekable(),
            src,
            line: 1,
            col: 1,
            out: Vec::new(),
        }
    }

    fn pos(&self) -> Pos {
        Pos::new(self.line, self.col)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map_or(self.src.len(), |&(i, _)| i)
    }

    fn push(&mut self, kind: TokenKind, lexeme: impl Into<String>, pos: Pos) {
        self.out.push(Token {
            kind,
            lexeme: lexeme.into(),
            pos,
        });
    }

    fn run(mut self) -> Result<Vec<Token>, SyntaxError> {
        while let Some(c) = self.peek() {
            let pos = self.pos();
            match c {
                c if c.is_whitespace() => {
                    self.bump();
                }
                '#' => {
                    // Comments run to end of line; this also covers a leading `#!`.
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                '"' => self.string(pos)?,
                c if c.is_ascii_digit() => self.number(pos)?,
                c if c.is_ascii_alphabetic() || c == '_' => self.word(pos),
                '\u{2192}' => {
                    self.bump();
                    self.push(TokenKind::Connector(Connector::OnTrue), "=>", pos);
                }
                '\u{219B}' => {
                    self.bump();
                    self.push(TokenKind::Connector(Connector::OnFalse), "!>", pos);
                }
                _ => self.symbol(c, pos)?,
            }
        }
        Ok(self.out)
    }

    fn word(&mut self, pos: Pos) {
        let start = self.offset();
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.bump();
        }
        let end = self.offset();
        let text = &self.src[start..end];
        let kind = match text {
            "true" => TokenKind::Bool(true),
            "false" => TokenKind::Bool(false),
            _ => match Keyword::from_ident(text) {
                Some(k) => TokenKind::Keyword(k),
                None => TokenKind::Ident(text.to_string()),
            },
        };
        let text = text.to_string();
        self.push(kind, text, pos);
    }

    fn number(&mut self, pos: Pos) -> Result<(), SyntaxError> {
        let start = self.offset();
        if self.peek() == Some('0') && matches!(self.peek2(), Some('b') | Some('B')) {
            self.bump();
            self.bump();
            let digits_start = self.offset();
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                self.bump();
            }
            let end = self.offset();
            let digits = &self.src[digits_start..end];
            if digits.is_empty() || !digits.chars().all(|c| c == '0' || c == '1') {
                return Err(SyntaxError::new(
                    pos,
                    format!("invalid binary literal `{}`", &self.src[start..end]),
                ));
            }
            let value = i64::from_str_radix(digits, 2).map_err(|_| {
                SyntaxError::new(pos, format!("binary literal `{}` overflows int", &self.src[start..end]))
            })?;
            let text = self.src[start..end].to_string();
            self.push(TokenKind::Int(value), text, pos);
            return Ok(());
        }

        let mut is_float = false;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if self.peek() == Some('.') && matches!(self.peek2(), Some(c) if c.is_ascii_digit()) {
            is_float = true;
            self.bump();
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            let mut look = self.chars.clone();
            look.next();
            let mut next = look.next().map(|(_, c)| c);
            if matches!(next, Some('+') | Some('-')) {
                next = look.next().map(|(_, c)| c);
            }
            if matches!(next, Some(c) if c.is_ascii_digit()) {
                is_float = true;
                self.bump();
                if matches!(self.peek(), Some('+') | Some('-')) {
                    self.bump();
                }
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.bump();
                }
            }
        }
        if matches!(self.peek(), Some(c) if c.is_ascii_alphabetic() || c == '_') {
            let bad = self.pos();
            return Err(SyntaxError::new(bad, "invalid character in numeric literal"));
        }
        let end = self.offset();
        let text = self.src[start..end].to_string();
        let kind = if is_float {
            TokenKind::Float(
                text.parse()
                    .map_err(|_| SyntaxError::new(pos, format!("invalid float literal `{text}`")))?,
            )
        } else {
            TokenKind::Int(
                text.parse()
                    .map_err(|_| SyntaxError::new(pos, format!("integer literal `{text}` overflows int")))?,
            )
        };
        self.push(kind, text, pos);
        Ok(())
    }

    fn string(&mut self, pos: Pos) -> Result<(), SyntaxError> {
        let start = self.offset();
        self.bump();
        let mut bytes: Vec<u8> = Vec::new();
        loop {
            let here = self.pos();
            let Some(c) = self.bump() else {
                return Err(SyntaxError::new(pos, "unterminated string literal"));
            };
            match c {
                '"' => break,
                '\n' => return Err(SyntaxError::new(pos, "unterminated string literal")),
                '\\' => {
                    let esc = self
                        .bump()
                        .ok_or_else(|| SyntaxError::new(pos, "unterminated string literal"))?;
                    match esc {
                        'n' => bytes.push(b'\n'),
                        't' => bytes.push(b'\t'),
                        '\\' => bytes.push(b'\\'),
                        '"' => bytes.push(b'"'),
                        'x' => {
                            let hi = self.bump();
                            let lo = self.bump();
                            let byte = match (hi.and_then(|c| c.to_digit(16)), lo.and_then(|c| c.to_digit(16))) {
                                (Some(h), Some(l)) => (h * 16 + l) as u8,
                                _ => {
                                    return Err(SyntaxError::new(
                                        here,
                                        "invalid `\\x` escape: expected two hex digits",
                                    ))
                                }
                            };
                            bytes.push(byte);
                        }
                        other => {
                            return Err(SyntaxError::new(
                                here,
                                format!("invalid escape sequence `\\{other}`"),
                            ))
                        }
                    }
                }
                c => {
                    let mut buf = [0u8; 4];
                    bytes.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
                }
            }
        }
        let value = String::from_utf8(bytes)
            .map_err(|_| SyntaxError::new(pos, "string literal is not valid UTF-8 after escapes"))?;
        let end = self.offset();
        let text = self.src[start..end].to_string();
        self.push(TokenKind::Str(value), text, pos);
        Ok(())
    }

    fn symbol(&mut self, c: char, pos: Pos) -> Result<(), SyntaxError> {
        let next = self.peek2();
        let (kind, len) = match (c, next) {
            ('=', Some('>')) => (TokenKind::Connector(Connector::OnTrue), 2),
            ('!', Some('>')) => (TokenKind::Connector(Connector::OnFalse), 2),
            ('=', Some('=')) => (TokenKind::Op(Op::EqEq), 2),
            ('!', Some('=')) => (TokenKind::Op(Op::Ne), 2),
            ('<', Some('=')) => (TokenKind::Op(Op::Le), 2),
            ('>', Some('=')) => (TokenKind::Op(Op::Ge), 2),
            ('&', Some('&')) => (TokenKind::Op(Op::AndAnd), 2),
            ('|', Some('|')) => (TokenKind::Op(Op::OrOr), 2),
            ('<', Some('<')) | ('>', Some('>')) => {
                return Err(SyntaxError::new(pos, "shift operators are not supported"))
            }
            (',', _) => (TokenKind::Connector(Connector::Always), 1),
            ('=', _) => (TokenKind::Punct(Punct::Assign), 1),
            (':', _) => (TokenKind::Punct(Punct::Colon), 1),
            (';', _) => (TokenKind::Punct(Punct::Semi), 1),
            ('(', _) => (TokenKind::Punct(Punct::LParen), 1),
            (')', _) => (TokenKind::Punct(Punct::RParen), 1),
            ('?', _) => (TokenKind::Punct(Punct::Question), 1),
            ('+', _) => (TokenKind::Op(Op::Plus), 1),
            ('-', _) => (TokenKind::Op(Op::Minus), 1),
            ('*', _) => (TokenKind::Op(Op::Star), 1),
            ('/', _) => (TokenKind::Op(Op::Slash), 1),
            ('%', _) => (TokenKind::Op(Op::Percent), 1),
            ('<', _) => (TokenKind::Op(Op::Lt), 1),
            ('>', _) => (TokenKind::Op(Op::Gt), 1),
            ('&', _) => (TokenKind::Op(Op::Amp), 1),
            ('|', _) => (TokenKind::Op(Op::Pipe), 1),
            ('^', _) => (TokenKind::Op(Op::Caret), 1),
            ('!', _) => (TokenKind::Op(Op::Bang), 1),
            ('~', _) => (TokenKind::Op(Op::Tilde), 1),
            _ => return Err(SyntaxError::new(pos, format!("invalid character `{}`", c.escape_debug()))),
        };
        let start = self.offset();
        for _ in 0..len {
            self.bump();
        }
        let end = self.offset();
        let text = self.src[start..end].to_string();
        self.push(kind, text, pos);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn binary_literal() {
        assert_eq!(kinds("0b11101"), vec![TokenKind::Int(29)]);
    }

    #[test]
    fn empty_source() {
        assert!(tokenize("").unwrap().is_empty());
    }

    #[test]
    fn unicode_arrows_normalize() {
        let toks = tokenize("x \u{2192} y").unwrap();
        assert_eq!(toks.len(), 3);
        assert_eq!(toks[1].kind, TokenKind::Connector(Connector::OnTrue));
        assert_eq!(toks[1].lexeme, "=>");
        // Same table entry as the ASCII form, byte for byte.
        assert_eq!("\u{2192}".as_bytes(), &[0xe2, 0x86, 0x92]);
        assert_eq!("\u{219B}".as_bytes(), &[0xe2, 0x86, 0x9b]);
        let ascii = tokenize("x => y").unwrap();
        assert_eq!(ascii[1].kind, toks[1].kind);
        assert_eq!(ascii[1].lexeme, toks[1].lexeme);
        let nt = tokenize("\u{219B}").unwrap();
        assert_eq!(nt[0].kind, TokenKind::Connector(Connector::OnFalse));
        assert_eq!(nt[0].lexeme, "!>");
    }

    #[test]
    fn comments_and_hashbang() {
        let src = "#!/bin/rips\nlevels: # trailing\n A;";
        let toks = tokenize(src).unwrap();
        assert_eq!(toks[0].kind, TokenKind::Keyword(Keyword::Levels));
        assert_eq!(toks[0].pos, Pos::new(2, 1));
        assert_eq!(toks.len(), 4);
    }

    #[test]
    fn string_escapes() {
        assert_eq!(
            kinds(r#""a\n\t\\\"\x41\xe2\x86\x92""#),
            vec![TokenKind::Str("a\n\t\\\"A\u{2192}".into())]
        );
    }

    #[test]
    fn lexical_errors_carry_positions() {
        let e = tokenize("levels:\n  \"abc").unwrap_err();
        assert_eq!(e.pos, Pos::new(2, 3));
        assert!(e.message.contains("unterminated"));

        let e = tokenize(r#"  "\q""#).unwrap_err();
        assert!(e.message.contains("invalid escape"));
        assert_eq!(e.pos, Pos::new(1, 4));

        let e = tokenize("a @ b").unwrap_err();
        assert_eq!(e.pos, Pos::new(1, 3));

        assert!(tokenize("0b102").is_err());
        assert!(tokenize("99999999999999999999").is_err());
        assert!(tokenize("a << 2").is_err());
    }

    #[test]
    fn operators_and_connectors() {
        assert_eq!(
            kinds("a >= b => !c != d !> e, f"),
            vec![
                TokenKind::Ident("a".into()),
                TokenKind::Op(Op::Ge),
                TokenKind::Ident("b".into()),
                TokenKind::Connector(Connector::OnTrue),
                TokenKind::Op(Op::Bang),
                TokenKind::Ident("c".into()),
                TokenKind::Op(Op::Ne),
                TokenKind::Ident("d".into()),
                TokenKind::Connector(Connector::OnFalse),
                TokenKind::Ident("e".into()),
                TokenKind::Connector(Connector::Always),
                TokenKind::Ident("f".into()),
            ]
        );
    }

    #[test]
    fn floats() {
        assert_eq!(kinds("2.5 1e3 1.5E-2"), vec![
            TokenKind::Float(2.5),
            TokenKind::Float(1000.0),
            TokenKind::Float(0.015)
        ]);
    }
}
