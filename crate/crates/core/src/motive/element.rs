//! Atoms, monomials and motive elements with their plain ring structure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;

use super::coeff::{Coeff, CoeffError};
use super::MotiveError;

/// The point base.
pub const POINT: &str = "pt";

/// An irreducible symbol. Equivariant classes carry their action order; order 1
/// means the trivial action.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// `[X × μ_n]` with the regular action, `n ≥ 3`; `μ₂` is rewritten through `L^(1/2)`.
    Mu(u32),
    Class { name: String, base: String, order: u32, invertible: bool },
    /// Total space of a tensor product of ℤ/2 bundles with the regular action.
    Torsor(BTreeSet<String>),
    /// Fused `Υ(P₁ ⊗ … ⊗ P_r)` in the quotient ring.
    Upsilon(BTreeSet<String>),
    /// Opaque fibre product of the listed factors.
    Fibre(Vec<Mono>),
    Pushed { map: String, inner: Mono },
    Pulled { map: String, inner: Box<Atom> },
}

impl Atom {
    pub fn order(&self) -> u32 {
        match self {
            Atom::Mu(n) => *n,
            Atom::Class { order, .. } => *order,
            Atom::Torsor(_) | Atom::Upsilon(_) => 2,
            Atom::Fibre(v) => v.iter().fold(1, |acc, m| acc.lcm(&m.order())),
            Atom::Pushed { inner, .. } => inner.order(),
            Atom::Pulled { inner, .. } => inner.order(),
        }
    }

    pub fn invertible(&self) -> bool {
        match self {
            Atom::Class { invertible, .. } => *invertible,
            Atom::Pulled { inner, .. } => inner.invertible(),
            _ => false,
        }
    }

    /// Classes over the point act as scalars under push and pull.
    pub fn is_point_class(&self) -> bool {
        match self {
            Atom::Mu(_) => true,
            Atom::Class { base, .. } => base == POINT,
            _ => false,
        }
    }

    pub fn mentions_upsilon(&self) -> bool {
        match self {
            Atom::Upsilon(_) => true,
            Atom::Fibre(v) => v.iter().any(Mono::mentions_upsilon),
            Atom::Pushed { inner, .. } => inner.mentions_upsilon(),
            Atom::Pulled { inner, .. } => inner.mentions_upsilon(),
            _ => false,
        }
    }
}

fn bundle_list(set: &BTreeSet<String>) -> String {
    set.iter().cloned().collect::<Vec<_>>().join("*")
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Mu(n) => write!(f, "mu({n})"),
            Atom::Class { name, .. } => write!(f, "[{name}]"),
            Atom::Torsor(s) => write!(f, "[{}]", bundle_list(s)),
            Atom::Upsilon(s) => write!(f, "Y({})", bundle_list(s)),
            Atom::Fibre(v) => {
                let parts: Vec<String> = v
                    .iter()
                    .map(|m| if m.0.len() == 1 && m.0.values().all(|&e| e == 1) { m.to_string() } else { format!("({m})") })
                    .collect();
                write!(f, "({})", parts.join("."))
            }
            Atom::Pushed { map, inner } => write!(f, "push({map}, {inner})"),
            Atom::Pulled { map, inner } => write!(f, "pull({map}, {inner})"),
        }
    }
}

/// A ⊙-product of atoms with integer exponents; negative exponents only on
/// invertible atoms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Mono(pub BTreeMap<Atom, i32>);

impl Mono {
    pub fn one() -> Self {
        Mono::default()
    }

    pub fn atom(a: Atom) -> Self {
        Mono(BTreeMap::from([(a, 1)]))
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn order(&self) -> u32 {
        self.0.keys().fold(1, |acc, a| acc.lcm(&a.order()))
    }

    pub fn mentions_upsilon(&self) -> bool {
        self.0.keys().any(Atom::mentions_upsilon)
    }

    /// ⊙-product. Υ factors fuse by symmetric difference of their bundle sets.
    pub fn mul(&self, o: &Mono) -> Mono {
        let mut out = self.0.clone();
        for (a, &e) in &o.0 {
            *out.entry(a.clone()).or_insert(0) += e;
        }
        out.retain(|_, e| *e != 0);
        let mut fused: BTreeSet<String> = BTreeSet::new();
        let mut had = false;
        out.retain(|a, e| match a {
            Atom::Upsilon(s) => {
                had = true;
                if e.rem_euclid(2) == 1 {
                    fused = fused.symmetric_difference(s).cloned().collect();
                }
                false
            }
            _ => true,
        });
        if had && !fused.is_empty() {
            out.insert(Atom::Upsilon(fused), 1);
        }
        Mono(out)
    }

    pub fn inverse(&self) -> Option<Mono> {
        self.0
            .iter()
            .map(|(a, &e)| a.invertible().then(|| (a.clone(), -e)))
            .collect::<Option<BTreeMap<_, _>>>()
            .map(Mono)
    }

    pub fn without(&self, a: &Atom) -> Mono {
        let mut m = self.0.clone();
        m.remove(a);
        Mono(m)
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(a, &e)| match e {
                1 => a.to_string(),
                _ if e < 0 => format!("{a}^({e})"),
                _ => format!("{a}^{e}"),
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// `even + odd·L^(1/2)` with coefficients in the localized Laurent ring.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HCoeff {
    pub even: Coeff,
    pub odd: Coeff,
}

impl HCoeff {
    pub fn zero() -> Self {
        HCoeff::default()
    }

    pub fn one() -> Self {
        HCoeff::from(Coeff::one())
    }

    pub fn int(n: i64) -> Self {
        HCoeff::from(Coeff::int(n))
    }

    /// `L^(a/2)`.
    pub fn l_half_pow(a: i64) -> Self {
        if a.rem_euclid(2) == 0 {
            HCoeff::from(Coeff::l_pow(a.div_euclid(2)))
        } else {
            HCoeff { even: Coeff::zero(), odd: Coeff::l_pow(a.div_euclid(2)) }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.even.is_zero() && self.odd.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.even.is_one() && self.odd.is_zero()
    }

    pub fn add(&self, o: &HCoeff) -> HCoeff {
        HCoeff { even: self.even.add(&o.even), odd: self.odd.add(&o.odd) }
    }

    pub fn neg(&self) -> HCoeff {
        HCoeff { even: self.even.neg(), odd: self.odd.neg() }
    }

    pub fn sub(&self, o: &HCoeff) -> HCoeff {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &HCoeff) -> HCoeff {
        let l = Coeff::l_pow(1);
        HCoeff {
            even: self.even.mul(&o.even).add(&l.mul(&self.odd.mul(&o.odd))),
            odd: self.even.mul(&o.odd).add(&self.odd.mul(&o.even)),
        }
    }

    /// Inverse via the norm `even² − L·odd²`.
    pub fn inverse(&self) -> Result<HCoeff, CoeffError> {
        let norm = self.even.mul(&self.even).sub(&Coeff::l_pow(1).mul(&self.odd.mul(&self.odd)));
        let inv = norm.inverse().map_err(|_| CoeffError::NotInvertible(self.to_string()))?;
        Ok(HCoeff { even: self.even.mul(&inv), odd: self.odd.neg().mul(&inv) })
    }

    /// Value under `L^(1/2) ↦ −1`.
    pub fn euler(&self) -> Result<crate::graded::Q, CoeffError> {
        Ok(self.even.at_one()? - self.odd.at_one()?)
    }

    fn summands(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.even.is_zero() {
            if self.even.denominator().is_empty() {
                out.extend(split_signed(&self.even.to_string()));
            } else {
                out.push(self.even.to_string());
            }
        }
        if !self.odd.is_zero() {
            let odd = &self.odd;
            match (odd.denominator().is_empty(), odd.numerator().as_monomial()) {
                (true, Some((c, n))) => {
                    let power = format!("L^({}/2)", 2 * n + 1);
                    out.push(match c.to_string().as_str() {
                        "1" => power,
                        "-1" => format!("-{power}"),
                        s => format!("{s}*{power}"),
                    });
                }
                _ => out.push(format!("({odd})*L^(1/2)")),
            }
        }
        out
    }
}

fn split_signed(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for tok in s.split(' ') {
        match tok {
            "+" => out.push(std::mem::take(&mut cur)),
            "-" => {
                out.push(std::mem::take(&mut cur));
                cur.push('-');
            }
            t => cur.push_str(t),
        }
    }
    out.push(cur);
    out
}

impl From<Coeff> for HCoeff {
    fn from(even: Coeff) -> Self {
        HCoeff { even, odd: Coeff::zero() }
    }
}

fn join_signed(parts: &[String]) -> String {
    let mut s = String::new();
    for (i, p) in parts.iter().enumerate() {
        match (i, p.strip_prefix('-')) {
            (0, _) => s.push_str(p),
            (_, Some(rest)) => {
                s.push_str(" - ");
                s.push_str(rest);
            }
            (_, None) => {
                s.push_str(" + ");
                s.push_str(p);
            }
        }
    }
    s
}

impl fmt::Display for HCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = self.summands();
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", join_signed(&parts))
    }
}

/// A finite sum `Σ c_m · m` over a base.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MotiveElement {
    base: String,
    terms: BTreeMap<Mono, HCoeff>,
}

impl MotiveElement {
    pub fn zero(base: &str) -> Self {
        MotiveElement { base: base.to_string(), terms: BTreeMap::new() }
    }

    pub fn one(base: &str) -> Self {
        MotiveElement::scalar(base, HCoeff::one())
    }

    pub fn scalar(base: &str, c: HCoeff) -> Self {
        MotiveElement::term(base, Mono::one(), c)
    }

    pub fn term(base: &str, m: Mono, c: HCoeff) -> Self {
        let mut e = MotiveElement::zero(base);
        if !c.is_zero() {
            e.terms.insert(m, c);
        }
        e
    }

    pub fn atom(base: &str, a: Atom) -> Self {
        MotiveElement::term(base, Mono::atom(a), HCoeff::one())
    }

    /// `L^(a/2)`.
    pub fn l_half_pow(base: &str, a: i64) -> Self {
        MotiveElement::scalar(base, HCoeff::l_half_pow(a))
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn terms(&self) -> &BTreeMap<Mono, HCoeff> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&Mono::one()).is_some_and(HCoeff::is_one)
    }

    pub fn rebased(mut self, base: &str) -> Self {
        self.base = base.to_string();
        self
    }

    pub(crate) fn push_term(&mut self, m: Mono, c: HCoeff) {
        let slot = self.terms.entry(m.clone()).or_default();
        *slot = slot.add(&c);
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    fn join_base(&self, o: &MotiveElement, scalars_ok: bool) -> Result<String, MotiveError> {
        if self.base == o.base {
            return Ok(self.base.clone());
        }
        let pick = |a: &MotiveElement, b: &MotiveElement| {
            if a.is_zero() || (scalars_ok && a.base == POINT) {
                Some(b.base.clone())
            } else {
                None
            }
        };
        pick(self, o)
            .or_else(|| pick(o, self))
            .ok_or_else(|| MotiveError::BaseMismatch { left: self.base.clone(), right: o.base.clone() })
    }

    /// Elements over the point are coerced along `c ↦ c ⊡ 1_X`.
    pub fn add(&self, o: &MotiveElement) -> Result<MotiveElement, MotiveError> {
        let base = self.join_base(o, true)?;
        let mut out = self.clone().rebased(&base);
        for (m, c) in &o.terms {
            out.push_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> MotiveElement {
        MotiveElement { base: self.base.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }

    pub fn sub(&self, o: &MotiveElement) -> Result<MotiveElement, MotiveError> {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &HCoeff) -> MotiveElement {
        let mut out = MotiveElement::zero(&self.base);
        for (m, d) in &self.terms {
            out.push_term(m.clone(), d.mul(c));
        }
        out
    }

    /// ⊙ without user quotient rules. Elements over the point act as scalars.
    pub fn mul_plain(&self, o: &MotiveElement) -> Result<MotiveElement, MotiveError> {
        let base = self.join_base(o, true)?;
        let mut out = MotiveElement::zero(&base);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.push_term(m1.mul(m2), c1.mul(c2));
            }
        }
        Ok(out)
    }

    pub fn pow_plain(&self, e: u32) -> Result<MotiveElement, MotiveError> {
        let mut out = MotiveElement::one(&self.base);
        for _ in 0..e {
            out = out.mul_plain(self)?;
        }
        Ok(out)
    }

    /// Inverse of a single term whose atoms are all invertible.
    pub fn inverse(&self) -> Result<MotiveElement, MotiveError> {
        let not = || MotiveError::NotInvertible(self.to_string());
        if self.terms.len() != 1 {
            return Err(not());
        }
        let (m, c) = self.terms.iter().next().expect("one term");
        let mi = m.inverse().ok_or_else(not)?;
        let ci = c.inverse().map_err(|_| not())?;
        Ok(MotiveElement::term(&self.base, mi, ci))
    }

    pub fn mentions_upsilon(&self) -> bool {
        self.terms.keys().any(Mono::mentions_upsilon)
    }

    pub fn coefficient(&self, m: &Mono) -> HCoeff {
        self.terms.get(m).cloned().unwrap_or_default()
    }
}

impl fmt::Display for MotiveElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            if m.is_one() {
                parts.extend(c.summands());
                continue;
            }
            let cs = c.summands();
            let text = if c.is_one() {
                m.to_string()
            } else if cs.len() == 1 && c.even.denominator().is_empty() && c.odd.denominator().is_empty() {
                match cs[0].as_str() {
                    "-1" => format!("-{m}"),
                    s => format!("{s}*{m}"),
                }
            } else {
                format!("({})*{m}", join_signed(&cs))
            };
            parts.push(text);
        }
        write!(f, "{}", join_signed(&parts))
    }
}
