//! Infix polynomial expressions over a generator set.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | name | 'dR(' name ')' | '(' expr ')'
//! ```
//! Division is only by nonzero constants.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::graded::{AlgebraElement, GeneratorSet, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{message} at column {column}")]
pub struct ExprError {
    pub message: String,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Num(BigInt),
    Name(String),
    Op(char),
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Num(s.parse().expect("digits")), start + 1));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push((Tok::Name(chars[start..i].iter().collect()), start + 1));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i + 1));
            i += 1;
        } else {
            return Err(ExprError { message: format!("unexpected character `{c}`"), column: i + 1 });
        }
    }
    Ok(out)
}

/// Names referenced by an expression (including names inside `dR(...)`).
pub fn referenced_names(text: &str) -> Result<BTreeSet<String>, ExprError> {
    Ok(lex(text)?
        .into_iter()
        .filter_map(|(t, _)| match t {
            Tok::Name(n) if n != "dR" => Some(n),
            _ => None,
        })
        .collect())
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    set: &'a Arc<GeneratorSet>,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, c)| *c)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError { message: message.into(), column: self.column() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<AlgebraElement, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<AlgebraElement, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if self.eat('/') {
                let col = self.column();
                let d = self.unary()?;
                let c = d.constant_term();
                if d.terms().keys().any(|m| !m.is_one()) || c.is_zero() {
                    return Err(ExprError { message: "division by a non-constant or zero".into(), column: col });
                }
                acc = acc.scale(&(Q::from_integer(1.into()) / c));
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<AlgebraElement, ExprError> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<AlgebraElement, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            match self.peek().cloned() {
                Some(Tok::Num(n)) => {
                    self.pos += 1;
                    let e: u32 = n
                        .try_into()
                        .map_err(|_| ExprError { message: "exponent too large".into(), column: self.column() })?;
                    Ok(base.pow(e))
                }
                _ => self.err("expected a non-negative integer exponent"),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<AlgebraElement, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(AlgebraElement::constant(self.set, Q::from_integer(n)))
            }
            Some(Tok::Name(n)) if n == "dR" => {
                self.pos += 1;
                if !self.eat('(') {
                    return self.err("expected `(` after dR");
                }
                let name = match self.peek().cloned() {
                    Some(Tok::Name(g)) => g,
                    _ => return self.err("expected a generator name"),
                };
                let g = self.lookup(&name)?;
                self.pos += 1;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(AlgebraElement::sym(self.set, crate::graded::Sym::form(g)))
            }
            Some(Tok::Name(n)) => {
                let g = self.lookup(&n)?;
                self.pos += 1;
                Ok(AlgebraElement::sym(self.set, crate::graded::Sym::alg(g)))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of expression"),
        }
    }

    fn lookup(&self, name: &str) -> Result<usize, ExprError> {
        self.set
            .lookup(name)
            .ok_or_else(|| ExprError { message: format!("unknown generator `{name}`"), column: self.column() })
    }
}

pub fn parse_element(text: &str, set: &Arc<GeneratorSet>) -> Result<AlgebraElement, ExprError> {
    let toks = lex(text)?;
    let end = text.chars().count() + 1;
    let mut p = Parser { toks, pos: 0, set, end };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_display() {
        let set = GeneratorSet::new(vec![("x".into(), 0), ("y".into(), -1)]).unwrap();
        let e = parse_element("2*x^2*y - 1/2*x + dR(x)*y", &set).unwrap();
        let again = parse_element(&e.to_string(), &set).unwrap();
        assert_eq!(e, again);
        let err = parse_element("x + q", &set).unwrap_err();
        assert_eq!(err.column, 5);
    }
}
