//! Free graded-commutative algebras over exact rationals, their Kähler forms,
//! and graded derivations.
//!
//! Symbols come in two kinds: algebra generators `g` of degree `|g| <= 0` and
//! form symbols `dR(g)` of degree `|g|` and parity `|g| + 1`. A monomial stores
//! symbols in canonical order (all generators in declaration order, then all
//! form symbols in declaration order); every reordering applies the Koszul sign.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GradedError {
    #[error("elements live over different generator sets")]
    MismatchedGenerators,
    #[error("partial derivatives are only taken in algebra generators, not in {0}")]
    FormPartial(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("degrees must be ≤ 0 (generator `{name}` has degree {degree})")]
    PositiveDegree { name: String, degree: i32 },
    #[error("duplicate generator name `{0}`")]
    DuplicateName(String),
    #[error("contraction needs a form of weight ≥ 1")]
    ContractFunction,
    #[error("point is missing a value for base coordinate `{0}`")]
    MissingCoordinate(String),
    #[error("element still contains form symbols")]
    NotAFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenKind {
    Base,
    Tier,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    pub degree: i32,
    pub kind: GenKind,
}

/// The ordered generator table shared by all elements of one algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    gens: Vec<Generator>,
    index: HashMap<String, usize>,
}

impl GeneratorSet {
    pub fn new(gens: Vec<(String, i32)>) -> Result<Arc<Self>, GradedError> {
        let mut out = Vec::with_capacity(gens.len());
        let mut index = HashMap::new();
        for (name, degree) in gens {
            if degree > 0 {
                return Err(GradedError::PositiveDegree { name, degree });
            }
            if index.insert(name.clone(), out.len()).is_some() {
                return Err(GradedError::DuplicateName(name));
            }
            let kind = if degree == 0 { GenKind::Base } else { GenKind::Tier };
            out.push(Generator { name, degree, kind });
        }
        Ok(Arc::new(GeneratorSet { gens: out, index }))
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn gens(&self) -> &[Generator] {
        &self.gens
    }

    pub fn get(&self, i: usize) -> &Generator {
        &self.gens[i]
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, GradedError> {
        self.lookup(name)
            .ok_or_else(|| GradedError::UnknownGenerator(name.to_string()))
    }

    pub fn degree(&self, s: Sym) -> i32 {
        self.gens[s.gen as usize].degree
    }

    pub fn parity(&self, s: Sym) -> u8 {
        let d = self.gens[s.gen as usize].degree + i32::from(s.form);
        d.rem_euclid(2) as u8
    }

    pub fn name(&self, s: Sym) -> String {
        let n = &self.gens[s.gen as usize].name;
        if s.form {
            format!("dR({n})")
        } else {
            n.clone()
        }
    }
}

/// A symbol: either an algebra generator or the form symbol over one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym {
    pub form: bool,
    pub gen: u32,
}

impl Sym {
    pub fn alg(g: usize) -> Self {
        Sym { form: false, gen: g as u32 }
    }
    pub fn form(g: usize) -> Self {
        Sym { form: true, gen: g as u32 }
    }
}

/// Sorted symbol/exponent pairs; exponents are positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(pub Vec<(Sym, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self, set: &GeneratorSet) -> i32 {
        self.0.iter().map(|&(s, e)| set.degree(s) * e as i32).sum()
    }

    pub fn form_weight(&self) -> u32 {
        self.0.iter().filter(|(s, _)| s.form).map(|&(_, e)| e).sum()
    }

    pub fn parity(&self, set: &GeneratorSet) -> u8 {
        (self
            .0
            .iter()
            .map(|&(s, e)| u32::from(set.parity(s)) * e)
            .sum::<u32>()
            % 2) as u8
    }

    pub fn exponent(&self, s: Sym) -> u32 {
        self.0
            .iter()
            .find(|(t, _)| *t == s)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    /// Product with Koszul sign; `None` when an odd symbol would square.
    pub fn mul(&self, other: &Monomial, set: &GeneratorSet) -> Option<(Monomial, bool)> {
        // Count, for every symbol of `other`, the odd mass of `self` strictly above it.
        let mut negative = false;
        for &(sb, eb) in &other.0 {
            if set.parity(sb) == 0 || eb % 2 == 0 {
                continue;
            }
            let above: u32 = self
                .0
                .iter()
                .filter(|(sa, _)| *sa > sb)
                .map(|&(sa, ea)| u32::from(set.parity(sa)) * ea)
                .sum();
            if above % 2 == 1 {
                negative = !negative;
            }
        }
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            if j == other.0.len() || (i < self.0.len() && self.0[i].0 < other.0[j].0) {
                out.push(self.0[i]);
                i += 1;
            } else if i == self.0.len() || other.0[j].0 < self.0[i].0 {
                out.push(other.0[j]);
                j += 1;
            } else {
                let s = self.0[i].0;
                if set.parity(s) == 1 {
                    return None;
                }
                out.push((s, self.0[i].1 + other.0[j].1));
                i += 1;
                j += 1;
            }
        }
        Some((Monomial(out), negative))
    }
}

/// An exact-rational combination of normal-ordered monomials.
#[derive(Clone)]
pub struct AlgebraElement {
    set: Arc<GeneratorSet>,
    terms: BTreeMap<Monomial, Q>,
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        same_set(&self.set, &other.set) && self.terms == other.terms
    }
}

impl Eq for AlgebraElement {}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraElement({self})")
    }
}

fn same_set(a: &Arc<GeneratorSet>, b: &Arc<GeneratorSet>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl AlgebraElement {
    pub fn zero(set: &Arc<GeneratorSet>) -> Self {
        AlgebraElement { set: set.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(set: &Arc<GeneratorSet>, c: Q) -> Self {
        let mut e = Self::zero(set);
        e.add_term(Monomial::one(), c);
        e
    }

    pub fn one(set: &Arc<GeneratorSet>) -> Self {
        Self::constant(set, Q::one())
    }

    pub fn from_monomial(set: &Arc<GeneratorSet>, m: Monomial, c: Q) -> Self {
        let mut e = Self::zero(set);
        e.add_term(m, c);
        e
    }

    pub fn sym(set: &Arc<GeneratorSet>, s: Sym) -> Self {
        Self::from_monomial(set, Monomial(vec![(s, 1)]), Q::one())
    }

    pub fn gen(set: &Arc<GeneratorSet>, name: &str) -> Result<Self, GradedError> {
        Ok(Self::sym(set, Sym::alg(set.index_of(name)?)))
    }

    pub fn form_of(set: &Arc<GeneratorSet>, name: &str) -> Result<Self, GradedError> {
        Ok(Self::sym(set, Sym::form(set.index_of(name)?)))
    }

    pub fn set(&self) -> &Arc<GeneratorSet> {
        &self.set
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Q> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        // Odd symbols never carry exponent > 1.
        if m.0.iter().any(|&(s, e)| e > 1 && self.set.parity(s) == 1) {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check(&self, other: &Self) -> Result<(), GradedError> {
        if same_set(&self.set, &other.set) {
            Ok(())
        } else {
            Err(GradedError::MismatchedGenerators)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, GradedError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, GradedError> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(&self.set);
        }
        AlgebraElement {
            set: self.set.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    /// Graded-commutative product (`wedge_mul`).
    pub fn try_mul(&self, other: &Self) -> Result<Self, GradedError> {
        self.check(other)?;
        let mut out = Self::zero(&self.set);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((m, neg)) = ma.mul(mb, &self.set) {
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one(&self.set);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Homogeneous components keyed by total degree.
    pub fn components(&self) -> BTreeMap<i32, AlgebraElement> {
        let mut out: BTreeMap<i32, AlgebraElement> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.degree(&self.set))
                .or_insert_with(|| Self::zero(&self.set))
                .add_term(m.clone(), c.clone());
        }
        out
    }

    /// The common degree when homogeneous (`None` for zero or mixed degrees).
    pub fn homogeneous_degree(&self) -> Option<i32> {
        let mut it = self.terms.keys().map(|m| m.degree(&self.set));
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn is_homogeneous_of(&self, degree: i32) -> bool {
        self.terms.keys().all(|m| m.degree(&self.set) == degree)
    }

    pub fn max_form_weight(&self) -> u32 {
        self.terms.keys().map(Monomial::form_weight).max().unwrap_or(0)
    }

    pub fn min_form_weight(&self) -> u32 {
        self.terms.keys().map(Monomial::form_weight).min().unwrap_or(0)
    }

    /// Total polynomial degree (sum of exponents).
    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.0.iter().map(|&(_, e)| e).sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn constant_term(&self) -> Q {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(Q::zero)
    }

    pub fn mentions(&self, g: usize) -> bool {
        self.terms
            .keys()
            .any(|m| m.0.iter().any(|(s, _)| s.gen as usize == g))
    }

    /// Left partial derivative in the algebra generator `g`.
    pub fn partial(&self, g: usize) -> Self {
        let s = Sym::alg(g);
        let pg = self.set.parity(s);
        let mut out = Self::zero(&self.set);
        for (m, c) in &self.terms {
            let Some(pos) = m.0.iter().position(|(t, _)| *t == s) else {
                continue;
            };
            let e = m.0[pos].1;
            let prefix = Monomial(m.0[..pos].to_vec()).parity(&self.set);
            let mut rest = m.0.clone();
            if e == 1 {
                rest.remove(pos);
            } else {
                rest[pos].1 -= 1;
            }
            let mut v = c * Q::from_integer(BigInt::from(e));
            if pg * prefix == 1 {
                v = -v;
            }
            out.add_term(Monomial(rest), v);
        }
        out
    }

    pub fn partial_by_name(&self, name: &str) -> Result<Self, GradedError> {
        if let Some(inner) = name.strip_prefix("dR(").and_then(|r| r.strip_suffix(')')) {
            if self.set.lookup(inner).is_some() {
                return Err(GradedError::FormPartial(name.to_string()));
            }
        }
        Ok(self.partial(self.set.index_of(name)?))
    }

    /// Applies the unique derivation of parity `parity` with the given images
    /// on symbols (`None` means zero).
    pub fn apply_derivation<F>(&self, parity: u8, image: F) -> Self
    where
        F: Fn(Sym) -> Option<AlgebraElement>,
    {
        let set = &self.set;
        let mut cache: HashMap<Sym, Option<AlgebraElement>> = HashMap::new();
        let mut out = Self::zero(set);
        for (m, c) in &self.terms {
            for (pos, &(s, e)) in m.0.iter().enumerate() {
                let img = cache.entry(s).or_insert_with(|| image(s)).clone();
                let Some(img) = img else { continue };
                if img.is_zero() {
                    continue;
                }
                let prefix = Monomial(m.0[..pos].to_vec());
                let mut rest = Vec::with_capacity(m.0.len() - pos);
                if e > 1 {
                    rest.push((s, e - 1));
                }
                rest.extend_from_slice(&m.0[pos + 1..]);
                let mut coeff = c * Q::from_integer(BigInt::from(e));
                if parity * prefix.parity(set) == 1 {
                    coeff = -coeff;
                }
                let left = Self::from_monomial(set, prefix, coeff);
                let right = Self::from_monomial(set, Monomial(rest), Q::one());
                out = &out + &(&(&left * &img) * &right);
            }
        }
        out
    }

    /// de Rham differential: odd, `g ↦ dR(g)`, `dR(g) ↦ 0`.
    pub fn de_rham(&self) -> Self {
        let set = self.set.clone();
        self.apply_derivation(1, |s| {
            if s.form {
                None
            } else {
                Some(Self::sym(&set, Sym::form(s.gen as usize)))
            }
        })
    }

    /// Replaces base coordinates by values and kills every monomial containing
    /// a negative-degree algebra generator. Form symbols are kept.
    pub fn specialize(&self, point: &BTreeMap<String, Q>) -> Result<Self, GradedError> {
        let mut out = Self::zero(&self.set);
        'terms: for (m, c) in &self.terms {
            let mut v = c.clone();
            let mut kept = Vec::new();
            for &(s, e) in &m.0 {
                if s.form {
                    kept.push((s, e));
                    continue;
                }
                let g = self.set.get(s.gen as usize);
                if g.degree < 0 {
                    continue 'terms;
                }
                let x = point
                    .get(&g.name)
                    .ok_or_else(|| GradedError::MissingCoordinate(g.name.clone()))?;
                v *= num_traits::pow(x.clone(), e as usize);
            }
            out.add_term(Monomial(kept), v);
        }
        Ok(out)
    }

    /// Value of a function at a point of the base (negative generators set to 0).
    pub fn evaluate(&self, point: &BTreeMap<String, Q>) -> Result<Q, GradedError> {
        let s = self.specialize(point)?;
        if s.terms.keys().any(|m| !m.is_one()) {
            return Err(GradedError::NotAFunction);
        }
        Ok(s.constant_term())
    }

    /// Ring substitution of algebra generators; generators without an image stay.
    /// Only meaningful for even images (used for degree-0 coordinate changes).
    pub fn substitute(
        &self,
        target: &Arc<GeneratorSet>,
        images: &BTreeMap<usize, AlgebraElement>,
    ) -> Result<Self, GradedError> {
        let mut out = Self::zero(target);
        for (m, c) in &self.terms {
            let mut t = Self::constant(target, c.clone());
            for &(s, e) in &m.0 {
                let f = match images.get(&(s.gen as usize)) {
                    Some(img) if !s.form => img.clone(),
                    _ => {
                        let name = self.set.get(s.gen as usize).name.clone();
                        let idx = target.index_of(&name)?;
                        Self::sym(target, Sym { form: s.form, gen: idx as u32 })
                    }
                };
                t = t.try_mul(&f.pow(e))?;
            }
            out = out.try_add(&t)?;
        }
        Ok(out)
    }

    /// Re-expresses the element over a larger generator set containing all
    /// names used here.
    pub fn embed(&self, target: &Arc<GeneratorSet>) -> Result<Self, GradedError> {
        self.substitute(target, &BTreeMap::new())
    }

    /// Coefficient of a monomial given as a list of symbols (any order).
    pub fn coefficient_of(&self, syms: &[Sym]) -> Q {
        let mut e = Self::one(&self.set);
        for &s in syms {
            e = &e * &Self::sym(&self.set, s);
        }
        match e.terms.iter().next() {
            Some((m, sign)) => self.terms.get(m).map(|c| c * sign).unwrap_or_else(Q::zero),
            None => Q::zero(),
        }
    }
}

impl std::ops::Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.try_add(rhs).expect("generator sets differ")
    }
}

impl std::ops::Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.try_sub(rhs).expect("generator sets differ")
    }
}

impl std::ops::Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.try_mul(rhs).expect("generator sets differ")
    }
}

impl std::ops::Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        AlgebraElement::neg(self)
    }
}

pub fn format_rational(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mut parts = Vec::new();
            if !a.is_one() || m.is_one() {
                parts.push(format_rational(&a));
            }
            for &(s, e) in &m.0 {
                let n = self.set.name(s);
                parts.push(if e == 1 { n } else { format!("{n}^{e}") });
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

/// A graded derivation of degree `shift`, given by its images on algebra
/// generators. It acts on forms as the Lie derivative.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivation {
    pub shift: i32,
    set: Arc<GeneratorSet>,
    images: BTreeMap<usize, AlgebraElement>,
}

impl Derivation {
    pub fn new(
        set: &Arc<GeneratorSet>,
        shift: i32,
        images: BTreeMap<usize, AlgebraElement>,
    ) -> Result<Self, GradedError> {
        for img in images.values() {
            if !same_set(img.set(), set) {
                return Err(GradedError::MismatchedGenerators);
            }
        }
        let images = images.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        Ok(Derivation { shift, set: set.clone(), images })
    }

    /// `∂/∂g` as a derivation of degree `-|g|`.
    pub fn partial(set: &Arc<GeneratorSet>, g: usize) -> Self {
        let mut images = BTreeMap::new();
        images.insert(g, AlgebraElement::one(set));
        Derivation { shift: -set.get(g).degree, set: set.clone(), images }
    }

    pub fn set(&self) -> &Arc<GeneratorSet> {
        &self.set
    }

    pub fn parity(&self) -> u8 {
        self.shift.rem_euclid(2) as u8
    }

    pub fn image(&self, g: usize) -> AlgebraElement {
        self.images
            .get(&g)
            .cloned()
            .unwrap_or_else(|| AlgebraElement::zero(&self.set))
    }

    pub fn images(&self) -> &BTreeMap<usize, AlgebraElement> {
        &self.images
    }

    /// Application; on form symbols `dR(g) ↦ (-1)^shift dR(ξ g)`.
    pub fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement, GradedError> {
        if !same_set(a.set(), &self.set) {
            return Err(GradedError::MismatchedGenerators);
        }
        let sign = if self.parity() == 1 { -Q::one() } else { Q::one() };
        Ok(a.apply_derivation(self.parity(), |s| {
            let img = self.images.get(&(s.gen as usize))?;
            if s.form {
                Some(img.de_rham().scale(&sign))
            } else {
                Some(img.clone())
            }
        }))
    }

    /// Interior product `ι_ξ`: parity `shift + 1`, `g ↦ 0`, `dR(g) ↦ ξ(g)`.
    pub fn contract(&self, w: &AlgebraElement) -> Result<AlgebraElement, GradedError> {
        if !same_set(w.set(), &self.set) {
            return Err(GradedError::MismatchedGenerators);
        }
        if w.terms().keys().any(|m| m.form_weight() == 0) {
            return Err(GradedError::ContractFunction);
        }
        Ok(w.apply_derivation((self.parity() + 1) % 2, |s| {
            if s.form {
                self.images.get(&(s.gen as usize)).cloned()
            } else {
                None
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(gens: &[(&str, i32)]) -> Arc<GeneratorSet> {
        GeneratorSet::new(gens.iter().map(|(n, d)| (n.to_string(), *d)).collect()).unwrap()
    }

    #[test]
    fn unit_and_odd_forms() {
        let s = set(&[("x", 0), ("z", -1)]);
        let x = AlgebraElement::gen(&s, "x").unwrap();
        assert_eq!(&AlgebraElement::one(&s) * &x, x);
        let dx = AlgebraElement::form_of(&s, "x").unwrap();
        assert!((&dx * &dx).is_zero());
        let dz = AlgebraElement::form_of(&s, "z").unwrap();
        assert!(!(&dz * &dz).is_zero());
    }

    #[test]
    fn partials() {
        let s = set(&[("x", 0), ("y", 0), ("y1", -1), ("y2", -1)]);
        let x = AlgebraElement::gen(&s, "x").unwrap();
        let y = AlgebraElement::gen(&s, "y").unwrap();
        let a = &(&x * &x) * &y;
        assert_eq!(a.partial(0), (&x * &y).scale(&q(2)));
        let y1 = AlgebraElement::gen(&s, "y1").unwrap();
        let y2 = AlgebraElement::gen(&s, "y2").unwrap();
        assert_eq!((&y1 * &y2).partial(3), y1.neg());
        assert!(AlgebraElement::constant(&s, q(5)).partial(2).is_zero());
        assert_eq!(
            x.partial_by_name("dR(x)"),
            Err(GradedError::FormPartial("dR(x)".into()))
        );
    }

    #[test]
    fn de_rham_examples() {
        let s = set(&[("x", 0)]);
        let x = AlgebraElement::gen(&s, "x").unwrap();
        let dx = AlgebraElement::form_of(&s, "x").unwrap();
        assert_eq!((&x * &x).de_rham(), (&x * &dx).scale(&q(2)));
        assert!((&x * &x).pow(2).de_rham().de_rham().is_zero());
    }

    #[test]
    fn contraction_examples() {
        let s = set(&[("x", 0), ("y", -1)]);
        let dx = AlgebraElement::form_of(&s, "x").unwrap();
        let dy = AlgebraElement::form_of(&s, "y").unwrap();
        let px = Derivation::partial(&s, 0);
        assert_eq!(px.contract(&dx).unwrap(), AlgebraElement::one(&s));
        assert!(px.contract(&AlgebraElement::zero(&s)).unwrap().is_zero());
        let py = Derivation::partial(&s, 1);
        assert_eq!(py.contract(&(&dy * &dx)).unwrap(), dx);
        assert_eq!(
            px.contract(&AlgebraElement::one(&s)),
            Err(GradedError::ContractFunction)
        );
    }

    #[test]
    fn positive_degree_rejected() {
        let err = GeneratorSet::new(vec![("y".into(), 1)]).unwrap_err();
        assert!(err.to_string().contains("degrees must be ≤ 0"));
    }

    #[test]
    fn mismatched_sets() {
        let a = set(&[("x", 0)]);
        let b = set(&[("u", 0)]);
        let x = AlgebraElement::gen(&a, "x").unwrap();
        let u = AlgebraElement::gen(&b, "u").unwrap();
        assert_eq!(x.try_mul(&u), Err(GradedError::MismatchedGenerators));
    }
}
