//! Canonical source rendering of a [`Program`]. Re-parsing the output yields
//! the same tree (modulo positions).

use std::fmt::{self, Write};

use super::ast::*;

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, section) in self.sections.iter().enumerate() {
            if i > 0 {
                f.write_char('\n')?;
            }
            match section {
                Section::Levels { levels, .. } => {
                    writeln!(f, "levels:")?;
                    for l in levels {
                        if l.soft {
                            writeln!(f, "    {} soft;", l.name)?;
                        } else {
                            writeln!(f, "    {};", l.name)?;
                        }
                    }
                }
                Section::Consts { consts, .. } => {
                    writeln!(f, "consts:")?;
                    write_decls(f, consts)?;
                }
                Section::Vars { vars, .. } => {
                    writeln!(f, "vars:")?;
                    write_decls(f, vars)?;
                }
                Section::Rules(rs) => {
                    writeln!(f, "rules {}:", rs.kind)?;
                    for rule in &rs.rules {
                        writeln!(f, "    {} ?", rule.trigger)?;
                        for link in &rule.chain {
                            write!(f, "        {}", link.action)?;
                            match link.next {
                                Some(c) => writeln!(f, " {}", c.as_str())?,
                                None => writeln!(f, ";")?,
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn write_decls(f: &mut fmt::Formatter<'_>, decls: &[ConstDecl]) -> fmt::Result {
    for d in decls {
        writeln!(f, "    {} {} = {};", d.name, d.ty.as_str(), d.init)?;
    }
    Ok(())
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        write_args(f, &self.args)?;
        f.write_char(')')
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Expr]) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

/// `min_prec` is the binding power the context demands; anything looser is
/// parenthesized.
fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    match &e.kind {
        ExprKind::Lit(lit) => write_literal(f, lit, min_prec),
        ExprKind::Name(n) => f.write_str(n),
        ExprKind::Call(name, args) => {
            write!(f, "{name}(")?;
            write_args(f, args)?;
            f.write_char(')')
        }
        ExprKind::Unary(op, inner) => {
            f.write_str(op.as_str())?;
            // `- -x` must not print as `--x` ambiguity-free anyway, but a
            // space keeps it readable.
            if matches!(inner.kind, ExprKind::Unary(..)) {
                f.write_char(' ')?;
            }
            write_expr(f, inner, UNARY_PRECEDENCE)
        }
        ExprKind::Binary(op, l, r) => {
            let prec = op.precedence();
            let paren = prec < min_prec;
            if paren {
                f.write_char('(')?;
            }
            write_expr(f, l, prec)?;
            write!(f, " {} ", op.as_str())?;
            // Left-associative: an equal-precedence right child needs parens.
            write_expr(f, r, prec + 1)?;
            if paren {
                f.write_char(')')?;
            }
            Ok(())
        }
    }
}

fn write_literal(f: &mut fmt::Formatter<'_>, lit: &Literal, min_prec: u8) -> fmt::Result {
    match lit {
        Literal::Int(v) if *v < 0 => {
            if min_prec >= UNARY_PRECEDENCE {
                write!(f, "({v})")
            } else {
                write!(f, "{v}")
            }
        }
        Literal::Int(v) => write!(f, "{v}"),
        Literal::Float(v) => {
            if v.is_nan() {
                f.write_str("(0.0 / 0.0)")
            } else if v.is_infinite() {
                f.write_str(if *v > 0.0 { "(1.0 / 0.0)" } else { "(-1.0 / 0.0)" })
            } else if v.is_sign_negative() && min_prec >= UNARY_PRECEDENCE {
                write!(f, "({v:?})")
            } else {
                write!(f, "{v:?}")
            }
        }
        Literal::Bool(b) => write!(f, "{b}"),
        Literal::Str(s) => write_string_literal(f, s),
    }
}

pub fn write_string_literal(out: &mut impl Write, s: &str) -> fmt::Result {
    out.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => out.write_str("\\\"")?,
            '\\' => out.write_str("\\\\")?,
            '\n' => out.write_str("\\n")?,
            '\t' => out.write_str("\\t")?,
            c if (c as u32) < 0x20 || c == '\u{7f}' => write!(out, "\\x{:02x}", c as u32)?,
            c => out.write_char(c)?,
        }
    }
    out.write_char('"')
}

#[cfg(test)]
mod tests {
    use super::super::parse_source;

    fn roundtrip(src: &str) {
        let a = parse_source(src, "t").unwrap();
        let printed = a.to_string();
        let b = parse_source(&printed, "t").unwrap_or_else(|e| panic!("{e}\n{printed}"));
        assert_eq!(a.without_positions(), b.without_positions(), "{printed}");
    }

    #[test]
    fn roundtrips() {
        roundtrip("levels: A; B soft; consts: X int = 1 - (2 - 3); vars: s string = \"a\\\"\\n\";");
        roundtrip("rules Graph: !(a && b) || -(-x) > ~y * (2 + 3) ? set(s, s + \"x\") => alert(string(1.5e300)), crash(\"\");");
        roundtrip("rules Msg: a - (b + c) == (a == b) ? True() !> False();");
    }
}
