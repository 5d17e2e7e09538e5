//! A YARA-compatible subset for payload scanning.
//!
//! Supported: any number of `rule name { strings: ... condition: ... }`
//! blocks (a colon after the name and tags are accepted), text strings
//! with escapes, hex strings without wildcards, and conditions built from
//! `$id`, `true`, `false`, `any of them`, `all of them`, `not`, `and`, `or`
//! and parentheses. Comments are `#`, `//` and `/* */`. A line break inside
//! a text string, together with the indentation that follows it, is a
//! continuation and contributes no bytes.
//!
//! A string matches when its bytes occur anywhere in the payload; a file
//! matches when any of its rules does.

use std::fmt;
use std::path::Path;

use memchr::memmem;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for PatternError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            f.write_str(&self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for PatternError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, PatternError> {
    Err(PatternError {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Clone)]
pub struct PatternSet {
    rules: Vec<PatternRule>,
}

#[derive(Debug, Clone)]
struct PatternRule {
    name: String,
    strings: Vec<(String, memmem::Finder<'static>)>,
    condition: Cond,
}

#[derive(Debug, Clone)]
enum Cond {
    Const(bool),
    Str(usize),
    AnyOf,
    AllOf,
    Not(Box<Cond>),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
}

impl PatternSet {
    pub fn load(path: &Path) -> Result<Self, PatternError> {
        let text = std::fs::read(path).map_err(|e| PatternError {
            line: 0,
            message: format!("cannot read: {e}"),
        })?;
        let text = String::from_utf8(text).map_err(|_| PatternError {
            line: 0,
            message: "not valid UTF-8".into(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, PatternError> {
        let tokens = lex(text)?;
        Parser { tokens, i: 0 }.file()
    }

    pub fn rule_names(&self) -> impl Iterator<Item = &str> {
        self.rules.iter().map(|r| r.name.as_str())
    }

    /// The byte patterns of every rule, in declaration order.
    pub fn patterns(&self) -> impl Iterator<Item = &[u8]> {
        self.rules.iter().flat_map(|r| r.strings.iter().map(|(_, f)| f.needle()))
    }

    pub fn is_match(&self, payload: &[u8]) -> bool {
        self.rules.iter().any(|r| {
            let mut cache = vec![None; r.strings.len()];
            r.eval(&r.condition, payload, &mut cache)
        })
    }
}

impl PatternRule {
    fn found(&self, i: usize, payload: &[u8], cache: &mut [Option<bool>]) -> bool {
        *cache[i].get_or_insert_with(|| self.strings[i].1.find(payload).is_some())
    }

    fn eval(&self, c: &Cond, payload: &[u8], cache: &mut [Option<bool>]) -> bool {
        match c {
            Cond::Const(b) => *b,
            Cond::Str(i) => self.found(*i, payload, cache),
            Cond::AnyOf => (0..self.strings.len()).any(|i| self.found(i, payload, cache)),
            Cond::AllOf => (0..self.strings.len()).all(|i| self.found(i, payload, cache)),
            Cond::Not(inner) => !self.eval(inner, payload, cache),
            Cond::And(a, b) => self.eval(a, payload, cache) && self.eval(b, payload, cache),
            Cond::Or(a, b) => self.eval(a, payload, cache) || self.eval(b, payload, cache),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    StrId(String),
    Text(Vec<u8>),
    Hex(Vec<u8>),
    Colon,
    LBrace,
    RBrace,
    Eq,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, PatternError> {
    let b = text.as_bytes();
    let mut out: Vec<(Tok, usize)> = Vec::new();
    let mut i = 0;
    let mut line = 1;
    while i < b.len() {
        let c = b[i];
        match c {
            b'\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            b'#' => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if b.get(i + 1) == Some(&b'/') => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if b.get(i + 1) == Some(&b'*') => {
                let start = line;
                i += 2;
                loop {
                    if i + 1 >= b.len() {
                        return err(start, "unterminated comment");
                    }
                    if b[i] == b'*' && b[i + 1] == b'/' {
                        i += 2;
                        break;
                    }
                    if b[i] == b'\n' {
                        line += 1;
                    }
                    i += 1;
                }
            }
            b':' => {
                out.push((Tok::Colon, line));
                i += 1;
            }
            b'=' => {
                out.push((Tok::Eq, line));
                i += 1;
            }
            b'(' => {
                out.push((Tok::LParen, line));
                i += 1;
            }
            b')' => {
                out.push((Tok::RParen, line));
                i += 1;
            }
            b'}' => {
                out.push((Tok::RBrace, line));
                i += 1;
            }
            b'{' if matches!(out.last(), Some((Tok::Eq, _))) => {
                let start = line;
                i += 1;
                let mut digits = Vec::new();
                loop {
                    match b.get(i) {
                        None => return err(start, "unterminated hex string"),
                        Some(b'}') => {
                            i += 1;
                            break;
                        }
                        Some(b'\n') => line += 1,
                        Some(c) if c.is_ascii_whitespace() => {}
                        Some(c) if c.is_ascii_hexdigit() => digits.push(*c),
                        Some(c) => {
                            return err(line, format!("unsupported character {:?} in hex string", *c as char))
                        }
                    }
                    i += 1;
                }
                if digits.len() % 2 != 0 {
                    return err(start, "hex string has an odd number of digits");
                }
                let bytes = digits
                    .chunks(2)
                    .map(|p| u8::from_str_radix(std::str::from_utf8(p).unwrap(), 16).unwrap())
                    .collect();
                out.push((Tok::Hex(bytes), start));
            }
            b'{' => {
                out.push((Tok::LBrace, line));
                i += 1;
            }
            b'"' => {
                let start = line;
                i += 1;
                let mut bytes = Vec::new();
                loop {
                    let Some(&c) = b.get(i) else {
                        return err(start, "unterminated string");
                    };
                    match c {
                        b'"' => {
                            i += 1;
                            break;
                        }
                        b'\n' => {
                            line += 1;
                            i += 1;
                            while i < b.len() && (b[i] == b' ' || b[i] == b'\t') {
                                i += 1;
                            }
                        }
                        b'\\' => {
                            let Some(&e) = b.get(i + 1) else {
                                return err(line, "unterminated string");
                            };
                            i += 2;
                            match e {
                                b'n' => bytes.push(b'\n'),
                                b't' => bytes.push(b'\t'),
                                b'r' => bytes.push(b'\r'),
                                b'\\' => bytes.push(b'\\'),
                                b'"' => bytes.push(b'"'),
                                b'x' => {
                                    let hex = b.get(i..i + 2).and_then(|h| std::str::from_utf8(h).ok());
                                    match hex.and_then(|h| u8::from_str_radix(h, 16).ok()) {
                                        Some(v) => bytes.push(v),
                                        None => return err(line, "\\x must be followed by two hex digits"),
                                    }
                                    i += 2;
                                }
                                other => return err(line, format!("invalid escape \\{}", other as char)),
                            }
                        }
                        _ => {
                            bytes.push(c);
                            i += 1;
                        }
                    }
                }
                out.push((Tok::Text(bytes), start));
            }
            b'$' => {
                let start = i + 1;
                i += 1;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::StrId(text[start..i].to_string()), line));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), line));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return err(line, format!("unexpected character {ch:?}"));
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.i).map(|t| &t.0)
    }

    fn line(&self) -> usize {
        self.tokens
            .get(self.i)
            .or_else(|| self.tokens.last())
            .map_or(1, |t| t.1)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.i).map(|t| t.0.clone());
        self.i += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), PatternError> {
        let line = self.line();
        match self.next() {
            Some(t) if t == want => Ok(()),
            _ => err(line, format!("expected {what}")),
        }
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn file(mut self) -> Result<PatternSet, PatternError> {
        let mut rules = Vec::new();
        while self.peek().is_some() {
            rules.push(self.rule()?);
        }
        if rules.is_empty() {
            return err(0, "no rules defined");
        }
        Ok(PatternSet { rules })
    }

    fn rule(&mut self) -> Result<PatternRule, PatternError> {
        if !self.keyword("rule") {
            return err(self.line(), "expected `rule`");
        }
        self.next();
        let line = self.line();
        let Some(Tok::Ident(name)) = self.next() else {
            return err(line, "expected rule name");
        };
        if self.peek() == Some(&Tok::Colon) {
            self.next();
            // Tags carry no meaning here.
            while matches!(self.peek(), Some(Tok::Ident(_))) {
                self.next();
            }
        }
        self.expect(Tok::LBrace, "`{`")?;
        let mut strings: Vec<(String, memmem::Finder<'static>)> = Vec::new();
        if self.keyword("meta") {
            self.next();
            self.expect(Tok::Colon, "`:` after meta")?;
            while matches!(self.peek(), Some(Tok::Ident(s)) if s != "strings" && s != "condition") {
                self.next();
                self.expect(Tok::Eq, "`=` in meta entry")?;
                let line = self.line();
                match self.next() {
                    Some(Tok::Text(_) | Tok::Ident(_)) => {}
                    _ => return err(line, "expected meta value"),
                }
            }
        }
        if self.keyword("strings") {
            self.next();
            self.expect(Tok::Colon, "`:` after strings")?;
            while let Some(Tok::StrId(id)) = self.peek().cloned() {
                let line = self.line();
                self.next();
                if id.is_empty() {
                    return err(line, "string identifier must have a name");
                }
                if strings.iter().any(|(n, _)| *n == id) {
                    return err(line, format!("duplicate string identifier ${id}"));
                }
                self.expect(Tok::Eq, "`=`")?;
                let bytes = match self.next() {
                    Some(Tok::Text(b) | Tok::Hex(b)) => b,
                    _ => return err(line, "expected a text or hex string"),
                };
                if bytes.is_empty() {
                    return err(line, format!("string ${id} is empty"));
                }
                while self.keyword("ascii") {
                    self.next();
                }
                if let Some(Tok::Ident(m)) = self.peek() {
                    if !matches!(m.as_str(), "condition") {
                        return err(self.line(), format!("unsupported string modifier `{m}`"));
                    }
                }
                strings.push((id, memmem::Finder::new(&bytes).into_owned()));
            }
        }
        if !self.keyword("condition") {
            return err(self.line(), "expected `condition:`");
        }
        self.next();
        self.expect(Tok::Colon, "`:` after condition")?;
        let condition = self.or(&strings)?;
        self.expect(Tok::RBrace, "`}` closing the rule")?;
        Ok(PatternRule {
            name,
            strings,
            condition,
        })
    }

    fn or(&mut self, s: &[(String, memmem::Finder<'static>)]) -> Result<Cond, PatternError> {
        let mut l = self.and(s)?;
        while self.keyword("or") {
            self.next();
            l = Cond::Or(Box::new(l), Box::new(self.and(s)?));
        }
        Ok(l)
    }

    fn and(&mut self, s: &[(String, memmem::Finder<'static>)]) -> Result<Cond, PatternError> {
        let mut l = self.unary(s)?;
        while self.keyword("and") {
            self.next();
            l = Cond::And(Box::new(l), Box::new(self.unary(s)?));
        }
        Ok(l)
    }

    fn unary(&mut self, s: &[(String, memmem::Finder<'static>)]) -> Result<Cond, PatternError> {
        let line = self.line();
        match self.next() {
            Some(Tok::Ident(k)) if k == "not" => Ok(Cond::Not(Box::new(self.unary(s)?))),
            Some(Tok::Ident(k)) if k == "true" => Ok(Cond::Const(true)),
            Some(Tok::Ident(k)) if k == "false" => Ok(Cond::Const(false)),
            Some(Tok::Ident(k)) if k == "any" || k == "all" => {
                if !self.keyword("of") {
                    return err(line, format!("expected `of` after `{k}`"));
                }
                self.next();
                if !self.keyword("them") {
                    return err(line, "only `them` is supported as a string set");
                }
                self.next();
                Ok(if k == "any" { Cond::AnyOf } else { Cond::AllOf })
            }
            Some(Tok::StrId(id)) => match s.iter().position(|(n, _)| *n == id) {
                Some(i) => Ok(Cond::Str(i)),
                None => err(line, format!("undefined string ${id}")),
            },
            Some(Tok::LParen) => {
                let c = self.or(s)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(c)
            }
            _ => err(line, "expected a condition"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub const EXPERIMENT3: &str = r#"rule experiment3:
{
   strings:
        # this is the Linux shellcode:
        $payload = "\x31\xc0\x50\x68\x2f\x2f\x73\x68\x68\x2f
                    \x62\x69\x6e\x89\xe3\x50\x53\x89\xe1\xb0
                    \x0b\xcd\x80"

   condition:
        $payload
}
"#;

    const SHELLCODE: [u8; 23] = [
        0x31, 0xc0, 0x50, 0x68, 0x2f, 0x2f, 0x73, 0x68, 0x68, 0x2f, 0x62, 0x69, 0x6e, 0x89, 0xe3, 0x50, 0x53,
        0x89, 0xe1, 0xb0, 0x0b, 0xcd, 0x80,
    ];

    #[test]
    fn experiment_listing_parses_with_continuations() {
        let set = PatternSet::parse(EXPERIMENT3).unwrap();
        assert_eq!(set.rule_names().collect::<Vec<_>>(), vec!["experiment3"]);
        assert_eq!(set.patterns().next().unwrap(), &SHELLCODE[..]);
        let mut payload = b"prefix".to_vec();
        payload.extend_from_slice(&SHELLCODE);
        payload.extend_from_slice(b"suffix");
        assert!(set.is_match(&payload));
        payload[10] ^= 1;
        assert!(!set.is_match(&payload));
        assert!(!set.is_match(b""));
        assert!(set.is_match(&SHELLCODE));
    }

    #[test]
    fn boolean_conditions_and_hex_strings() {
        let set = PatternSet::parse(
            r#"
            // two rules; either may match
            rule a { strings: $x = "abc" $y = { 64 65 66 } condition: $x and not ($y) }
            rule b : tag1 tag2 { strings: $z = "zz" ascii condition: all of them or false }
            /* block
               comment */
            "#,
        )
        .unwrap();
        assert!(set.is_match(b"--abc--"));
        assert!(!set.is_match(b"abcdef"));
        assert!(set.is_match(b"abcdefzz"));
        assert!(!set.is_match(b"nothing"));
    }

    #[test]
    fn errors_carry_lines() {
        let e = PatternSet::parse("rule a {\n condition:\n $nope\n}").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("$nope"));
        assert!(PatternSet::parse("").is_err());
        assert!(PatternSet::parse("rule a { strings: $x = \"a\" nocase condition: $x }").is_err());
        assert!(PatternSet::parse("rule a { strings: $x = \"\\xZZ\" condition: $x }").is_err());
    }

    fn naive_contains(hay: &[u8], needle: &[u8]) -> bool {
        needle.is_empty() || hay.windows(needle.len()).any(|w| w == needle)
    }

    proptest! {
        #[test]
        fn agrees_with_naive_scan(
            needle in proptest::collection::vec(any::<u8>(), 1..24),
            mut hay in proptest::collection::vec(0u8..4, 0..2048),
            plant in any::<bool>(),
            at in any::<usize>(),
        ) {
            if plant {
                let at = at % (hay.len() + 1);
                hay.splice(at..at, needle.iter().copied());
            }
            let text: String = needle.iter().map(|b| format!("\\x{b:02x}")).collect();
            let set = PatternSet::parse(&format!("rule r {{ strings: $p = \"{text}\" condition: $p }}")).unwrap();
            prop_assert_eq!(set.is_match(&hay), naive_contains(&hay, &needle));
        }
    }
}
