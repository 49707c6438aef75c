//! Motivic nearby and vanishing cycles from log-resolution combinatorics.
//!
//! The resolution is input: divisors `E_i` with multiplicities `N_i` and
//! discrepancies `ν_i`, and for each nonempty `I ⊆ J` with nonempty stratum the
//! class of the cover `Ẽ°_I`.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;

use crate::graded::Q;
use crate::motive::{Atom, HCoeff, MotiveElement, MotiveError, Universe};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VanishingError {
    #[error(transparent)]
    Motive(#[from] MotiveError),
    #[error("stratum {subset:?}: class has action order {order}, which does not divide m_I = {m}")]
    MalformedGcd { subset: Vec<usize>, order: u32, m: u32 },
    #[error("stratum {0:?} is empty or names an unknown divisor")]
    BadSubset(Vec<usize>),
    #[error("divisor `{0}` has multiplicity 0")]
    ZeroMultiplicity(String),
    #[error("dim U is not set")]
    MissingDimU,
    #[error("unknown builtin `{0}` (expected power:N, node or zero)")]
    UnknownBuiltin(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divisor {
    pub name: String,
    pub n: u32,
    pub nu: u32,
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratumClass {
    pub subset: BTreeSet<usize>,
    pub class: MotiveElement,
    pub over_x0: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolutionDatum {
    pub base: String,
    pub divisors: Vec<Divisor>,
    pub strata: Vec<StratumClass>,
    pub dim_u: Option<u32>,
    /// `X₀ = ∅`: the function has no critical points on `U₀`.
    pub x0_empty: bool,
    /// `[U₀ ∖ X₀]`.
    pub away_class: Option<MotiveElement>,
    /// Euler numbers of the opaque symbols used by the strata.
    pub euler: BTreeMap<String, Q>,
}

fn element_order(e: &MotiveElement) -> u32 {
    e.terms().iter().fold(1, |acc, (m, c)| {
        let half = if c.odd.is_zero() { 1 } else { 2 };
        acc.lcm(&m.order()).lcm(&half)
    })
}

/// `(1 − L)^k`.
fn one_minus_l_pow(base: &str, k: usize) -> MotiveElement {
    let f = MotiveElement::one(base).sub(&MotiveElement::l_half_pow(base, 2)).expect("same base");
    f.pow_plain(k as u32).expect("same base")
}

impl ResolutionDatum {
    pub fn empty(base: &str) -> Self {
        ResolutionDatum {
            base: base.to_string(),
            divisors: Vec::new(),
            strata: Vec::new(),
            dim_u: None,
            x0_empty: false,
            away_class: None,
            euler: BTreeMap::new(),
        }
    }

    pub fn m(&self, subset: &BTreeSet<usize>) -> u32 {
        subset.iter().fold(0, |g, &i| g.gcd(&self.divisors[i].n))
    }

    pub fn validate(&self) -> Result<(), VanishingError> {
        for d in &self.divisors {
            if d.n == 0 {
                return Err(VanishingError::ZeroMultiplicity(d.name.clone()));
            }
        }
        for s in &self.strata {
            let v: Vec<usize> = s.subset.iter().copied().collect();
            if v.is_empty() || v.iter().any(|&i| i >= self.divisors.len()) {
                return Err(VanishingError::BadSubset(v));
            }
            let (m, order) = (self.m(&s.subset), element_order(&s.class));
            if m % order != 0 {
                return Err(VanishingError::MalformedGcd { subset: v, order, m });
            }
        }
        Ok(())
    }

    fn weighted_sum(&self, keep: impl Fn(&StratumClass) -> bool) -> Result<MotiveElement, VanishingError> {
        let mut out = MotiveElement::zero(&self.base);
        for s in self.strata.iter().filter(|s| keep(s)) {
            let w = one_minus_l_pow(&self.base, s.subset.len() - 1);
            out = out.add(&w.mul_plain(&s.class.clone().rebased(&self.base))?)?;
        }
        Ok(out)
    }

    /// Disjoint union: divisors and strata side by side.
    pub fn disjoint_union(&self, other: &ResolutionDatum) -> ResolutionDatum {
        let shift = self.divisors.len();
        let mut out = self.clone();
        out.divisors.extend(other.divisors.iter().cloned());
        out.strata.extend(other.strata.iter().map(|s| StratumClass {
            subset: s.subset.iter().map(|i| i + shift).collect(),
            class: s.class.clone().rebased(&self.base),
            over_x0: s.over_x0,
        }));
        out.x0_empty = self.x0_empty && other.x0_empty;
        out.away_class = match (&self.away_class, &other.away_class) {
            (Some(a), Some(b)) => a.add(&b.clone().rebased(&self.base)).ok(),
            _ => None,
        };
        out.euler.extend(other.euler.clone());
        out
    }
}

/// `Σ_{∅≠I⊆J} (1 − L)^{|I|−1} [Ẽ°_I]`.
pub fn motivic_nearby(d: &ResolutionDatum) -> Result<MotiveElement, VanishingError> {
    d.validate()?;
    d.weighted_sum(|_| true)
}

/// `L^{−dim U/2} ⊙ (1 − nearby)` restricted to `X₀`.
pub fn motivic_vanishing(d: &ResolutionDatum) -> Result<MotiveElement, VanishingError> {
    d.validate()?;
    let dim = d.dim_u.ok_or(VanishingError::MissingDimU)?;
    if d.x0_empty {
        return Ok(MotiveElement::zero(&d.base));
    }
    let near = d.weighted_sum(|s| s.over_x0)?;
    let diff = MotiveElement::one(&d.base).sub(&near)?;
    Ok(diff.scale(&HCoeff::l_half_pow(-i64::from(dim))))
}

/// Euler characteristic of a class built from the datum's symbols.
pub fn euler_specialize(d: &ResolutionDatum, e: &MotiveElement) -> Result<Q, VanishingError> {
    Ok(Universe::new().euler(e, &d.euler)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrictReport {
    pub ok: bool,
    pub diagnostics: Vec<String>,
}

/// Strict transforms have `N = ν = 1`, and the strata away from `X₀` carry the
/// trivial action and add up to `[U₀ ∖ X₀]`.
pub fn strict_transform_check(d: &ResolutionDatum) -> StrictReport {
    let mut diagnostics = Vec::new();
    if let Err(e) = d.validate() {
        diagnostics.push(e.to_string());
    }
    for div in d.divisors.iter().filter(|x| x.strict) {
        if div.n != 1 || div.nu != 1 {
            diagnostics.push(format!("strict transform `{}` has N = {}, ν = {}", div.name, div.n, div.nu));
        }
    }
    for s in d.strata.iter().filter(|s| !s.over_x0) {
        if element_order(&s.class) != 1 {
            diagnostics.push(format!("stratum {:?} away from X₀ has a nontrivial action", s.subset));
        }
    }
    if diagnostics.is_empty() {
        match d.weighted_sum(|s| !s.over_x0) {
            Ok(away) => {
                let declared = d.away_class.clone().unwrap_or_else(|| MotiveElement::zero(&d.base));
                if !away.sub(&declared).is_ok_and(|r| r.is_zero()) {
                    diagnostics.push(format!("strata away from X₀ sum to {away}, expected {declared}"));
                }
            }
            Err(e) => diagnostics.push(e.to_string()),
        }
    }
    StrictReport { ok: diagnostics.is_empty(), diagnostics }
}

/// Curated data: `power:N` (x^N on A¹), `node` (xy on A², one blow-up), `zero[:D]`.
pub fn builtin_datum(spec: &str) -> Result<ResolutionDatum, VanishingError> {
    let unknown = || VanishingError::UnknownBuiltin(spec.to_string());
    let (kind, param) = match spec.split_once(':') {
        Some((k, p)) => (k, Some(p)),
        None => (spec, None),
    };
    let base = "X0";
    let mut d = ResolutionDatum::empty(base);
    match (kind, param) {
        ("power", Some(p)) => {
            let n: u32 = p.trim().parse().map_err(|_| unknown())?;
            if n == 0 {
                return Err(unknown());
            }
            d.dim_u = Some(1);
            d.divisors.push(Divisor { name: "E".into(), n, nu: 1, strict: false });
            let smooth = n == 1;
            d.x0_empty = smooth;
            d.strata.push(StratumClass {
                subset: BTreeSet::from([0]),
                class: Universe::mu(base, n),
                over_x0: !smooth,
            });
            d.away_class = Some(if smooth { MotiveElement::one(base) } else { MotiveElement::zero(base) });
        }
        ("node", None) => {
            d.dim_u = Some(2);
            d.divisors.push(Divisor { name: "E".into(), n: 2, nu: 2, strict: false });
            d.divisors.push(Divisor { name: "D1".into(), n: 1, nu: 1, strict: true });
            d.divisors.push(Divisor { name: "D2".into(), n: 1, nu: 1, strict: true });
            let cover = Atom::Class { name: "Et".into(), base: base.into(), order: 2, invertible: false };
            d.euler.insert("Et".into(), Q::from_integer(0.into()));
            let lm1 = MotiveElement::l_half_pow(base, 2).sub(&MotiveElement::one(base)).expect("same base");
            let st = |s: &[usize], class: MotiveElement, over_x0| StratumClass {
                subset: s.iter().copied().collect(),
                class,
                over_x0,
            };
            d.strata.push(st(&[0], MotiveElement::atom(base, cover), true));
            d.strata.push(st(&[1], lm1.clone(), false));
            d.strata.push(st(&[2], lm1.clone(), false));
            d.strata.push(st(&[0, 1], MotiveElement::one(base), true));
            d.strata.push(st(&[0, 2], MotiveElement::one(base), true));
            d.away_class = Some(lm1.scale(&HCoeff::int(2)));
        }
        ("zero", None) => {
            d.dim_u = Some(1);
        }
        ("zero", Some(p)) => {
            d.dim_u = Some(p.trim().parse().map_err(|_| unknown())?);
        }
        _ => return Err(unknown()),
    }
    Ok(d)
}
