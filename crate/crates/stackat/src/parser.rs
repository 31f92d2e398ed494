//! Concrete syntax for StacKAT programs.
//!
//! The grammar, loosest-binding first:
//!
//! ```text
//! expr   := term ('+' term)*
//! term   := factor (';' factor)*
//! factor := atom '*'*
//! atom   := '0' | '1'
//!         | field '=' nat | field '!=' nat | field ':=' nat
//!         | 'push' nat | 'pop' nat
//!         | '(' expr ')'
//! ```
//!
//! `+` is choice, `;` is sequencing, postfix `*` is iteration and binds
//! tightest. Fields match `[a-zA-Z_][a-zA-Z0-9_]*` (`push` and `pop` are
//! reserved), values are decimal naturals, and whitespace is insignificant.
//! Both binary operators associate to the left.
//!
//! [`parse`] checks every mentioned field and value against a [`Universe`]
//! and reports the offender with its source position; [`parse_unchecked`]
//! skips that check so a universe can be inferred from the program text
//! itself. [`pretty`] renders an [`Expr`] back into this syntax with minimal
//! parentheses, and parsing a pretty-printed expression yields the original
//! AST.
//!
//! Program files may begin with a universe declaration line:
//!
//! ```text
//! #universe fields=f1,f2 values=0..3
//! ```
//!
//! parsed by [`parse_universe_line`]; `values` accepts either a comma list
//! or an inclusive `lo..hi` range.

use std::fmt::Write as _;

use thiserror::Error;

use crate::ast::{Expr, Field, Universe, Value};

/// Parse or validation failure, with a 1-based source position.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}:{col}: field `{name}` is not declared in the universe")]
    UndeclaredField {
        name: String,
        line: usize,
        col: usize,
    },
    #[error("{line}:{col}: value {value} is not declared in the universe")]
    UndeclaredValue {
        value: Value,
        line: usize,
        col: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Plus,
    Semi,
    Star,
    LParen,
    RParen,
    Eq,
    Neq,
    Assign,
    Push,
    Pop,
    Nat(Value),
    Ident(String),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Plus => "`+`".to_string(),
            Tok::Semi => "`;`".to_string(),
            Tok::Star => "`*`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Eq => "`=`".to_string(),
            Tok::Neq => "`!=`".to_string(),
            Tok::Assign => "`:=`".to_string(),
            Tok::Push => "`push`".to_string(),
            Tok::Pop => "`pop`".to_string(),
            Tok::Nat(n) => format!("`{n}`"),
            Tok::Ident(s) => format!("`{s}`"),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax_error<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::Syntax {
        line,
        col,
        msg: msg.into(),
    })
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1usize;
    let mut col = 1usize;
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            '+' => {
                bump(&mut chars);
                toks.push(Spanned {
                    tok: Tok::Plus,
                    line: tline,
                    col: tcol,
                });
            }
            ';' => {
                bump(&mut chars);
                toks.push(Spanned {
                    tok: Tok::Semi,
                    line: tline,
                    col: tcol,
                });
            }
            '*' => {
                bump(&mut chars);
                toks.push(Spanned {
                    tok: Tok::Star,
                    line: tline,
                    col: tcol,
                });
            }
            '(' => {
                bump(&mut chars);
                toks.push(Spanned {
                    tok: Tok::LParen,
                    line: tline,
                    col: tcol,
                });
            }
            ')' => {
                bump(&mut chars);
                toks.push(Spanned {
                    tok: Tok::RParen,
                    line: tline,
                    col: tcol,
                });
            }
            '=' => {
                bump(&mut chars);
                toks.push(Spanned {
                    tok: Tok::Eq,
                    line: tline,
                    col: tcol,
                });
            }
            '!' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    toks.push(Spanned {
                        tok: Tok::Neq,
                        line: tline,
                        col: tcol,
                    });
                } else {
                    return syntax_error(tline, tcol, "expected `=` after `!`");
                }
            }
            ':' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    toks.push(Spanned {
                        tok: Tok::Assign,
                        line: tline,
                        col: tcol,
                    });
                } else {
                    return syntax_error(tline, tcol, "expected `=` after `:`");
                }
            }
            c if c.is_ascii_digit() => {
                let mut n: u64 = 0;
                while let Some(&d) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    bump(&mut chars);
                    n = n * 10 + u64::from(d as u8 - b'0');
                    if n > u64::from(Value::MAX) {
                        return syntax_error(tline, tcol, "value literal is too large");
                    }
                }
                toks.push(Spanned {
                    tok: Tok::Nat(n as Value),
                    line: tline,
                    col: tcol,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&d) = chars.peek() {
                    if !(d.is_ascii_alphanumeric() || d == '_') {
                        break;
                    }
                    ident.push(bump(&mut chars));
                }
                let tok = match ident.as_str() {
                    "push" => Tok::Push,
                    "pop" => Tok::Pop,
                    _ => Tok::Ident(ident),
                };
                toks.push(Spanned {
                    tok,
                    line: tline,
                    col: tcol,
                });
            }
            c => {
                return syntax_error(tline, tcol, format!("unexpected character `{c}`"));
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    universe: Option<&'a Universe>,
    end_line: usize,
    end_col: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos) {
            Some(s) => (s.line, s.col),
            None => (self.end_line, self.end_col),
        }
    }

    fn advance(&mut self) -> &Spanned {
        let s = &self.toks[self.pos];
        self.pos += 1;
        s
    }

    fn expect_nat(&mut self, what: &str) -> Result<(Value, usize, usize), ParseError> {
        let (line, col) = self.here();
        match self.peek() {
            Some(Tok::Nat(_)) => {
                let s = self.advance();
                if let Tok::Nat(n) = s.tok {
                    Ok((n, s.line, s.col))
                } else {
                    unreachable!()
                }
            }
            Some(t) => syntax_error(
                line,
                col,
                format!("expected {what}, found {}", t.describe()),
            ),
            None => syntax_error(line, col, format!("expected {what}, found end of input")),
        }
    }

    fn check_value(&self, v: Value, line: usize, col: usize) -> Result<(), ParseError> {
        if let Some(u) = self.universe {
            if !u.has_value(v) {
                return Err(ParseError::UndeclaredValue {
                    value: v,
                    line,
                    col,
                });
            }
        }
        Ok(())
    }

    fn check_field(&self, name: &str, line: usize, col: usize) -> Result<(), ParseError> {
        if let Some(u) = self.universe {
            if u.field_index(name).is_none() {
                return Err(ParseError::UndeclaredField {
                    name: name.to_string(),
                    line,
                    col,
                });
            }
        }
        Ok(())
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.parse_term()?;
        while self.peek() == Some(&Tok::Plus) {
            self.advance();
            let rhs = self.parse_term()?;
            e = Expr::plus(e, rhs);
        }
        Ok(e)
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.parse_factor()?;
        while self.peek() == Some(&Tok::Semi) {
            self.advance();
            let rhs = self.parse_factor()?;
            e = Expr::seq(e, rhs);
        }
        Ok(e)
    }

    fn parse_factor(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.parse_atom()?;
        while self.peek() == Some(&Tok::Star) {
            self.advance();
            e = Expr::star(e);
        }
        Ok(e)
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        let (line, col) = self.here();
        match self.peek() {
            Some(Tok::Nat(0)) => {
                self.advance();
                Ok(Expr::Zero)
            }
            Some(Tok::Nat(1)) => {
                self.advance();
                Ok(Expr::One)
            }
            Some(Tok::Nat(n)) => {
                syntax_error(line, col, format!("expected `0` or `1`, found `{n}`"))
            }
            Some(Tok::Push) => {
                self.advance();
                let (v, vline, vcol) = self.expect_nat("a value after `push`")?;
                self.check_value(v, vline, vcol)?;
                Ok(Expr::Push(v))
            }
            Some(Tok::Pop) => {
                self.advance();
                let (v, vline, vcol) = self.expect_nat("a value after `pop`")?;
                self.check_value(v, vline, vcol)?;
                Ok(Expr::Pop(v))
            }
            Some(Tok::Ident(_)) => {
                let (name, fline, fcol) = {
                    let s = self.advance();
                    if let Tok::Ident(name) = &s.tok {
                        (name.clone(), s.line, s.col)
                    } else {
                        unreachable!()
                    }
                };
                self.check_field(&name, fline, fcol)?;
                let (oline, ocol) = self.here();
                let op = match self.peek() {
                    Some(Tok::Eq) => Tok::Eq,
                    Some(Tok::Neq) => Tok::Neq,
                    Some(Tok::Assign) => Tok::Assign,
                    Some(t) => {
                        return syntax_error(
                            oline,
                            ocol,
                            format!(
                                "expected `=`, `!=`, or `:=` after field `{name}`, found {}",
                                t.describe()
                            ),
                        )
                    }
                    None => {
                        return syntax_error(
                            oline,
                            ocol,
                            format!("expected `=`, `!=`, or `:=` after field `{name}`"),
                        )
                    }
                };
                self.advance();
                let (v, vline, vcol) = self.expect_nat("a value")?;
                self.check_value(v, vline, vcol)?;
                Ok(match op {
                    Tok::Eq => Expr::TestEq(name, v),
                    Tok::Neq => Expr::TestNeq(name, v),
                    Tok::Assign => Expr::Assign(name, v),
                    _ => unreachable!(),
                })
            }
            Some(Tok::LParen) => {
                self.advance();
                let e = self.parse_expr()?;
                let (cline, ccol) = self.here();
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.advance();
                        Ok(e)
                    }
                    Some(t) => {
                        syntax_error(cline, ccol, format!("expected `)`, found {}", t.describe()))
                    }
                    None => syntax_error(cline, ccol, "expected `)`, found end of input"),
                }
            }
            Some(t) => syntax_error(
                line,
                col,
                format!("expected an expression, found {}", t.describe()),
            ),
            None => syntax_error(line, col, "expected an expression, found end of input"),
        }
    }
}

fn parse_with(text: &str, universe: Option<&Universe>) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let (end_line, end_col) = {
        let mut line = 1;
        let mut col = 1;
        for c in text.chars() {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    };
    let mut p = Parser {
        toks,
        pos: 0,
        universe,
        end_line,
        end_col,
    };
    let e = p.parse_expr()?;
    if p.pos < p.toks.len() {
        let s = &p.toks[p.pos];
        return syntax_error(
            s.line,
            s.col,
            format!("unexpected {} after expression", s.tok.describe()),
        );
    }
    Ok(e)
}

/// Parses a program, checking every field and value against `universe`.
pub fn parse(text: &str, universe: &Universe) -> Result<Expr, ParseError> {
    parse_with(text, Some(universe))
}

/// Parses a program without universe validation. Used when the universe is
/// inferred from the program text itself.
pub fn parse_unchecked(text: &str) -> Result<Expr, ParseError> {
    parse_with(text, None)
}

/// Renders an expression in concrete syntax with minimal parentheses.
/// `parse(&pretty(e), u)` returns `e` exactly.
pub fn pretty(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Plus(..) => 0,
        Expr::Seq(..) => 1,
        Expr::Star(..) => 2,
        _ => 3,
    }
}

fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    let my = prec(e);
    let parens = my < min_prec;
    if parens {
        out.push('(');
    }
    match e {
        Expr::Zero => out.push('0'),
        Expr::One => out.push('1'),
        // Binary operators are left-associative in the grammar, so the left
        // child may sit at the same precedence but the right child needs to
        // bind strictly tighter.
        Expr::Plus(a, b) => {
            write_expr(out, a, 0);
            out.push_str(" + ");
            write_expr(out, b, 1);
        }
        Expr::Seq(a, b) => {
            write_expr(out, a, 1);
            out.push_str(" ; ");
            write_expr(out, b, 2);
        }
        Expr::Star(a) => {
            write_expr(out, a, 2);
            out.push('*');
        }
        Expr::TestEq(f, v) => {
            let _ = write!(out, "{f} = {v}");
        }
        Expr::TestNeq(f, v) => {
            let _ = write!(out, "{f} != {v}");
        }
        Expr::Assign(f, v) => {
            let _ = write!(out, "{f} := {v}");
        }
        Expr::Push(v) => {
            let _ = write!(out, "push {v}");
        }
        Expr::Pop(v) => {
            let _ = write!(out, "pop {v}");
        }
    }
    if parens {
        out.push(')');
    }
}

/// Parses a `#universe` declaration line:
///
/// ```text
/// #universe fields=f1,f2 values=0..3
/// ```
///
/// Both keys are optional and may appear in either order; `fields` takes a
/// comma-separated list of identifiers, `values` a comma list of naturals or
/// an inclusive `lo..hi` range. Returns the declared field and value lists
/// (unsorted; [`Universe::new`] normalizes).
pub fn parse_universe_line(line: &str) -> Result<(Vec<Field>, Vec<Value>), ParseError> {
    let rest = line
        .trim()
        .strip_prefix("#universe")
        .ok_or_else(|| ParseError::Syntax {
            line: 1,
            col: 1,
            msg: "universe declaration must start with `#universe`".to_string(),
        })?;
    let mut fields = Vec::new();
    let mut values = Vec::new();
    for part in rest.split_whitespace() {
        if let Some(list) = part.strip_prefix("fields=") {
            for name in list.split(',').filter(|s| !s.is_empty()) {
                let ok = name
                    .chars()
                    .next()
                    .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                    && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                if !ok {
                    return syntax_error(1, 1, format!("invalid field name `{name}`"));
                }
                fields.push(name.to_string());
            }
        } else if let Some(list) = part.strip_prefix("values=") {
            if let Some((lo, hi)) = list.split_once("..") {
                let lo: Value = lo.parse().map_err(|_| ParseError::Syntax {
                    line: 1,
                    col: 1,
                    msg: format!("invalid value range start `{lo}`"),
                })?;
                let hi: Value = hi.parse().map_err(|_| ParseError::Syntax {
                    line: 1,
                    col: 1,
                    msg: format!("invalid value range end `{hi}`"),
                })?;
                if lo > hi {
                    return syntax_error(1, 1, format!("empty value range `{lo}..{hi}`"));
                }
                values.extend(lo..=hi);
            } else {
                for v in list.split(',').filter(|s| !s.is_empty()) {
                    let v: Value = v.parse().map_err(|_| ParseError::Syntax {
                        line: 1,
                        col: 1,
                        msg: format!("invalid value `{v}`"),
                    })?;
                    values.push(v);
                }
            }
        } else {
            return syntax_error(1, 1, format!("unknown universe key `{part}`"));
        }
    }
    Ok((fields, values))
}

/// Splits program text into an optional `#universe` declaration and the
/// program body. The declaration, if present, must be the first
/// non-whitespace line.
pub fn split_universe_header(text: &str) -> (Option<&str>, &str) {
    let trimmed = text.trim_start();
    if trimmed.starts_with("#universe") {
        match trimmed.split_once('\n') {
            Some((header, body)) => (Some(header), body),
            None => (Some(trimmed), ""),
        }
    } else {
        (None, text)
    }
}
