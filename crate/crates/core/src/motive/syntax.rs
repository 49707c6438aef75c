//! Motive expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '.') unary)*          * is ⊙, . is the fibre product
//! unary   := '-' unary | power
//! power   := primary ('^' exponent)?
//! exponent:= int | '-' int | '(' '-'? int ('/' int)? ')'    fractions only on L, with /2
//! primary := int | 'L' | '[' name ('*' name)* ']' | '(' expr ')'
//!          | 'mu(' int ')' | 'GL(' int ')' | 'Y(' name ('*' name)* ')' | 'one(' name ')'
//!          | 'inv(' expr ')' | 'mbar(' expr ')' | 'push(' name ',' expr ')' | 'pull(' name ',' expr ')'
//! ```
//! `[A]` is a declared class; `[P]` or `[P*Q]` are double-cover total spaces.
//! Integers, `L`, `mu(n)` and `GL(n)` live over the point and act as scalars.

use std::collections::BTreeSet;

use num_bigint::BigInt;

use super::element::{MotiveElement, POINT};
use super::universe::{fold_bundles, gl_class, StackContext, Universe};
use super::{HCoeff, MotiveError};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Num(BigInt),
    Name(String),
    Op(char),
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, MotiveError> {
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
        } else if "+-*.^()[],/".contains(c) {
            out.push((Tok::Op(c), i + 1));
            i += 1;
        } else {
            return Err(MotiveError::Syntax { message: format!("unexpected character `{c}`"), column: i + 1 });
        }
    }
    Ok(out)
}

/// A parsed value and whether it syntactically contains an odd power of `L^(1/2)`.
struct Val {
    e: MotiveElement,
    half: bool,
}

pub struct Evaluator<'a> {
    pub universe: &'a Universe,
    pub stacks: &'a [StackContext],
}

struct Parser<'a, 'u> {
    ev: &'a Evaluator<'u>,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser<'_, '_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, c)| *c)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, MotiveError> {
        Err(MotiveError::Syntax { message: message.into(), column: self.column() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), MotiveError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn name(&mut self) -> Result<String, MotiveError> {
        match self.peek().cloned() {
            Some(Tok::Name(n)) => {
                self.pos += 1;
                Ok(n)
            }
            _ => self.err("expected a name"),
        }
    }

    fn int(&mut self) -> Result<BigInt, MotiveError> {
        let neg = self.eat('-');
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(if neg { -n } else { n })
            }
            _ => self.err("expected an integer"),
        }
    }

    fn small(&mut self) -> Result<i64, MotiveError> {
        let col = self.column();
        let n = self.int()?;
        i64::try_from(n).map_err(|_| MotiveError::Syntax { message: "integer too large".into(), column: col })
    }

    fn name_list(&mut self, close: char) -> Result<Vec<String>, MotiveError> {
        let mut names = vec![self.name()?];
        while self.eat('*') {
            names.push(self.name()?);
        }
        self.expect(close)?;
        Ok(names)
    }

    fn expr(&mut self) -> Result<Val, MotiveError> {
        let mut acc = self.term()?;
        loop {
            let neg = if self.eat('+') {
                false
            } else if self.eat('-') {
                true
            } else {
                return Ok(acc);
            };
            let r = self.term()?;
            let r_e = if neg { r.e.neg() } else { r.e };
            acc = Val { e: acc.e.add(&r_e)?, half: acc.half || r.half };
        }
    }

    fn term(&mut self) -> Result<Val, MotiveError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                let r = self.unary()?;
                acc = Val { e: self.ev.universe.odot(&acc.e, &r.e)?, half: acc.half || r.half };
            } else if self.peek() == Some(&Tok::Op('.')) {
                let col = self.column();
                self.pos += 1;
                let r = self.unary()?;
                if acc.half || r.half {
                    return Err(MotiveError::Syntax {
                        message: MotiveError::HalfPowerInDot.to_string(),
                        column: col,
                    });
                }
                acc = Val { e: self.ev.universe.dot(&acc.e, &r.e)?, half: false };
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Val, MotiveError> {
        if self.eat('-') {
            let v = self.unary()?;
            return Ok(Val { e: v.e.neg(), half: v.half });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Val, MotiveError> {
        let is_l = self.peek() == Some(&Tok::Name("L".into()));
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let col = self.column();
        let (num, den) = if self.eat('(') {
            let n = self.small()?;
            let d = if self.eat('/') { self.small()? } else { 1 };
            self.expect(')')?;
            (n, d)
        } else {
            (self.small()?, 1)
        };
        let bad = |m: &str| Err(MotiveError::Syntax { message: m.into(), column: col });
        match den {
            1 => {}
            2 if is_l => {
                return Ok(Val { e: MotiveElement::l_half_pow(POINT, num), half: num % 2 != 0 });
            }
            2 => return bad("fractional exponents are only allowed on L"),
            _ => return bad("exponent denominators must be 1 or 2"),
        }
        if is_l {
            return Ok(Val { e: MotiveElement::l_half_pow(POINT, 2 * num), half: false });
        }
        let b = if num < 0 { base.e.inverse()? } else { base.e };
        let mut acc = MotiveElement::one(b.base());
        for _ in 0..num.unsigned_abs() {
            acc = self.ev.universe.odot(&acc, &b)?;
        }
        Ok(Val { e: acc, half: base.half })
    }

    fn inner(&mut self) -> Result<Val, MotiveError> {
        let v = self.expr()?;
        self.expect(')')?;
        Ok(v)
    }

    fn primary(&mut self) -> Result<Val, MotiveError> {
        let u = self.ev.universe;
        let plain = |e| Ok(Val { e, half: false });
        let col = self.column();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                plain(MotiveElement::scalar(POINT, HCoeff::from(super::Coeff::big(n))))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                self.inner()
            }
            Some(Tok::Op('[')) => {
                self.pos += 1;
                let names = self.name_list(']')?;
                if let [one] = names.as_slice() {
                    if u.class(one).is_some() {
                        return plain(u.class_element(one)?);
                    }
                }
                let base = self.bundle_base(&names, col)?;
                plain(u.torsor(&base, &fold_bundles(&names))?)
            }
            Some(Tok::Name(n)) => {
                self.pos += 1;
                if n == "L" {
                    return plain(MotiveElement::l_half_pow(POINT, 2));
                }
                if !self.eat('(') {
                    return Err(MotiveError::Syntax { message: format!("unknown identifier `{n}`"), column: col });
                }
                match n.as_str() {
                    "mu" | "GL" => {
                        let k = self.small()?;
                        self.expect(')')?;
                        let k = u32::try_from(k).map_err(|_| MotiveError::Syntax {
                            message: format!("{n} needs a non-negative integer"),
                            column: col,
                        })?;
                        if n == "mu" {
                            if k == 0 {
                                return self.err("mu(n) needs n ≥ 1");
                            }
                            plain(Universe::mu(POINT, k))
                        } else {
                            plain(gl_class(POINT, k)?)
                        }
                    }
                    "Y" => {
                        let names = self.name_list(')')?;
                        let base = self.bundle_base(&names, col)?;
                        Ok(Val { e: u.upsilon(&base, &fold_bundles(&names))?, half: false })
                    }
                    "one" => {
                        let b = self.name()?;
                        self.expect(')')?;
                        plain(MotiveElement::one(&b))
                    }
                    "inv" => {
                        let v = self.inner()?;
                        Ok(Val { e: v.e.inverse()?, half: v.half })
                    }
                    "mbar" => {
                        let v = self.inner()?;
                        Ok(Val { e: u.mbar(&v.e)?, half: v.half })
                    }
                    "push" | "pull" => {
                        let f = self.name()?;
                        self.expect(',')?;
                        let v = self.inner()?;
                        let e = if n == "push" {
                            u.push(&f, &v.e)?
                        } else {
                            let ctx = u.morphism(&f).ok().and_then(|d| self.ev.stacks.iter().find(|c| c.base == d.source));
                            u.pull_with(&f, &v.e, ctx)?
                        };
                        Ok(Val { e, half: v.half })
                    }
                    _ => Err(MotiveError::Syntax { message: format!("unknown function `{n}`"), column: col }),
                }
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of expression"),
        }
    }

    fn bundle_base(&self, names: &[String], col: usize) -> Result<String, MotiveError> {
        let bases: BTreeSet<&String> = names
            .iter()
            .map(|b| {
                self.ev.universe.bundle(b).map(|d| &d.base).ok_or_else(|| MotiveError::Syntax {
                    message: format!("`{b}` is neither a declared class nor a declared bundle"),
                    column: col,
                })
            })
            .collect::<Result<_, _>>()?;
        match bases.into_iter().collect::<Vec<_>>().as_slice() {
            [one] => Ok((*one).clone()),
            _ => Err(MotiveError::Syntax { message: "bundles in a product must share a base".into(), column: col }),
        }
    }
}

impl Evaluator<'_> {
    pub fn eval(&self, text: &str) -> Result<MotiveElement, MotiveError> {
        let toks = lex(text)?;
        let end = text.chars().count() + 1;
        let mut p = Parser { ev: self, toks, pos: 0, end };
        let v = p.expr()?;
        if p.pos != p.toks.len() {
            return p.err("trailing input");
        }
        Ok(v.e)
    }
}

pub fn evaluate(text: &str, universe: &Universe) -> Result<MotiveElement, MotiveError> {
    Evaluator { universe, stacks: &[] }.eval(text)
}
