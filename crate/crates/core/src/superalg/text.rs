//! Canonical text form of polynomials.
//!
//! ```text
//! expr   = [ "+" | "-" ] term { ( "+" | "-" ) term } ;
//! term   = factor { "*" factor } ;
//! factor = atom [ "^" integer ] ;
//! atom   = integer [ "/" integer ] | ident | "(" expr ")" ;
//! ident  = ( letter | "_" ) { letter | digit | "_" | "'" } ;
//! ```
//!
//! Output always uses this grammar, so printing then parsing in the same
//! scope is the identity.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::{Rational, SuperPoly, Var};

/// Name resolution for the parser.
pub type Scope = HashMap<String, Var>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn to_text(p: &SuperPoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().enumerate() {
        let neg = c.is_negative();
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let a = c.abs();
        let factors: Vec<String> = m
            .factors()
            .iter()
            .map(|&(v, e)| {
                if e == 1 {
                    v.name().to_string()
                } else {
                    format!("{}^{}", v.name(), e)
                }
            })
            .collect();
        if factors.is_empty() {
            out.push_str(&format_rational(&a));
        } else {
            if !a.is_one() {
                out.push_str(&format_rational(&a));
                out.push('*');
            }
            out.push_str(&factors.join("*"));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexed {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn lex(src: &str) -> Result<Vec<Lexed>, ParseError> {
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 0);
    let mut chars = src.chars().peekable();
    while let Some(c) = chars.next() {
        column += 1;
        let (l, col) = (line, column);
        let tok = match c {
            '\n' => {
                line += 1;
                column = 0;
                continue;
            }
            c if c.is_whitespace() => continue,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() => {
                let mut s = c.to_string();
                while let Some(&d) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    s.push(d);
                    chars.next();
                    column += 1;
                }
                Tok::Int(s.parse().expect("digits"))
            }
            c if is_ident_start(c) => {
                let mut s = c.to_string();
                while let Some(&d) = chars.peek() {
                    if !is_ident_continue(d) {
                        break;
                    }
                    s.push(d);
                    chars.next();
                    column += 1;
                }
                Tok::Ident(s)
            }
            other => {
                return Err(ParseError {
                    line: l,
                    column: col,
                    message: format!("unexpected character {other:?}"),
                })
            }
        };
        out.push(Lexed { tok, line: l, column: col });
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Lexed>,
    pos: usize,
    scope: &'a Scope,
    end: (usize, usize),
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map_or(self.end, |l| (l.line, l.column))
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, column) = self.here();
        Err(ParseError { line, column, message: message.into() })
    }

    fn expr(&mut self) -> Result<SuperPoly, ParseError> {
        let mut neg = false;
        match self.peek() {
            Some(Tok::Minus) => {
                neg = true;
                self.pos += 1;
            }
            Some(Tok::Plus) => self.pos += 1,
            _ => {}
        }
        let first = self.term()?;
        let mut acc = if neg { -first } else { first };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc += self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc -= &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<SuperPoly, ParseError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<SuperPoly, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Int(n)) => {
                    self.pos += 1;
                    let e: u32 = n
                        .try_into()
                        .or_else(|_| self.fail("exponent out of range"))?;
                    return Ok(base.pow(e));
                }
                _ => return self.fail("expected integer exponent"),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<SuperPoly, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    match self.peek().cloned() {
                        Some(Tok::Int(d)) if d != BigInt::from(0) => {
                            self.pos += 1;
                            Ok(SuperPoly::constant(Rational::new(n, d)))
                        }
                        _ => self.fail("expected nonzero integer denominator"),
                    }
                } else {
                    Ok(SuperPoly::constant(Rational::from_integer(n)))
                }
            }
            Some(Tok::Ident(name)) => match self.scope.get(&name) {
                Some(&v) => {
                    self.pos += 1;
                    Ok(SuperPoly::var(v))
                }
                None => self.fail(format!("unknown symbol `{name}`")),
            },
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.fail("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(t) => self.fail(format!("unexpected token {}", describe(&t))),
            None => self.fail("unexpected end of input"),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => n.to_string(),
        Tok::Ident(s) => s.clone(),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
    }
}

/// Parses the canonical text grammar, resolving names through `scope`.
pub fn parse_poly(src: &str, scope: &Scope) -> Result<SuperPoly, ParseError> {
    let toks = lex(src)?;
    let lines: Vec<&str> = src.split('\n').collect();
    let end = (lines.len(), lines.last().map_or(0, |l| l.chars().count()) + 1);
    let mut p = Parser { toks, pos: 0, scope, end };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return p.fail("trailing input");
    }
    Ok(out)
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&describe(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superalg::Parity::{Even, Odd};

    fn scope(vars: &[Var]) -> Scope {
        vars.iter().map(|v| (v.name().to_string(), *v)).collect()
    }

    #[test]
    fn prints_rationals_and_powers() {
        let eps = Var::parameter("ε", Even, Some(3));
        let x = Var::base("x", Even);
        let s = scope(&[eps, x]);
        let f = parse_poly("ε*x^2 + 2*ε^2*x^2", &s).unwrap();
        assert_eq!(f.to_string(), "ε*x^2 + 2*ε^2*x^2");
        let g = parse_poly("-1/2*x^2 + 3/4", &s).unwrap();
        assert_eq!(g.to_string(), "3/4 - 1/2*x^2");
        assert_eq!(SuperPoly::zero().to_string(), "0");
    }

    #[test]
    fn parses_parentheses_and_odd_order() {
        let xi = Var::base("ξ", Odd);
        let eta = Var::base("η", Odd);
        let s = scope(&[xi, eta]);
        let f = parse_poly("η*ξ", &s).unwrap();
        assert_eq!(f.to_string(), "-ξ*η");
        let g = parse_poly("(ξ + η)^2", &s).unwrap();
        assert!(g.is_zero());
    }

    #[test]
    fn reports_position() {
        let x = Var::base("x", Even);
        let s = scope(&[x]);
        let err = parse_poly("x +\n  2*zz", &s).unwrap_err();
        assert_eq!((err.line, err.column), (2, 5));
        assert!(err.message.contains("zz"));
        let err = parse_poly("x + ", &s).unwrap_err();
        assert!(err.message.contains("end of input"));
    }
}
