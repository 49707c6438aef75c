//! Declared symbols and morphisms, and the operations that need them.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::{One, Zero};

use super::coeff::Coeff;
use super::element::{Atom, HCoeff, Mono, MotiveElement, POINT};
use super::MotiveError;
use crate::graded::Q;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassDecl {
    pub base: String,
    pub order: u32,
    pub invertible: bool,
    pub euler: Option<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BundleDecl {
    pub base: String,
    /// Euler characteristic of the total space.
    pub euler: Option<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Gl(u32),
    /// A special group, named by an invertible class over the point.
    Special(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MorphismKind {
    Identity,
    Representable,
    Smooth(u32),
    /// Zariski-locally trivial principal bundle.
    Bundle(GroupKind),
    Stratum,
    /// Non-representable; pullback needs a stratified atlas of the source.
    Stack,
    /// `[g, f]` is `g ∘ f`.
    Composite(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismDecl {
    pub source: String,
    pub target: String,
    pub kind: MorphismKind,
}

/// A Cartesian square `W → R` (`new_pull`), `W → X` (`new_push`) over
/// `φ: X → Y` (`pull`) and `ψ: R → Y` (`push`), so `φ^* ψ_* = q_* p^*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Square {
    pub pull: String,
    pub push: String,
    pub new_pull: String,
    pub new_push: String,
}

/// User-supplied quotient data: `left ⊙ right = result`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OdotRule {
    pub left: Atom,
    pub right: Atom,
    pub result: MotiveElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratum {
    pub label: String,
    /// `ι_j: X_j → X`, or `id`.
    pub inclusion: String,
    pub group: u32,
    pub atlas: String,
    /// `φ_j: S_j → X`, or `id`.
    pub atlas_map: String,
    pub rel_dim: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StackContext {
    pub base: String,
    pub strata: Vec<Stratum>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StratumData {
    /// `[S_j ×_X X_j]`; defaults to `φ_j*(1)` when `ι_j` is the identity.
    pub atlas_class: Option<MotiveElement>,
    pub chart_motive: MotiveElement,
    pub rel_dim: u32,
}

const RULE_LIMIT: usize = 256;

#[derive(Clone, Debug, Default)]
pub struct Universe {
    classes: BTreeMap<String, ClassDecl>,
    bundles: BTreeMap<String, BundleDecl>,
    morphisms: BTreeMap<String, MorphismDecl>,
    squares: Vec<Square>,
    rules: Vec<OdotRule>,
}

/// `[GL(n)] = L^{n(n−1)/2} ∏_{k=1}^n (L^k − 1)`.
pub fn gl_coeff(n: u32) -> Result<Coeff, MotiveError> {
    if n == 0 {
        return Err(MotiveError::NonPositiveGl);
    }
    let mut c = Coeff::l_pow(i64::from(n * (n - 1) / 2));
    for k in 1..=n {
        c = c.mul(&Coeff::l_pow_minus_one(k));
    }
    Ok(c)
}

pub fn gl_class(base: &str, n: u32) -> Result<MotiveElement, MotiveError> {
    Ok(MotiveElement::scalar(base, gl_coeff(n)?.into()))
}

impl Universe {
    pub fn new() -> Self {
        Universe::default()
    }

    fn name_free(&self, name: &str) -> Result<(), MotiveError> {
        if self.classes.contains_key(name) || self.bundles.contains_key(name) || name == "id" {
            return Err(MotiveError::Duplicate(name.to_string()));
        }
        Ok(())
    }

    pub fn declare_class(
        &mut self,
        name: &str,
        base: &str,
        order: u32,
        invertible: bool,
        euler: Option<Q>,
    ) -> Result<(), MotiveError> {
        self.name_free(name)?;
        if order == 0 {
            return Err(MotiveError::Declaration(format!("class `{name}` needs an action order ≥ 1")));
        }
        let decl = ClassDecl { base: base.to_string(), order, invertible, euler };
        self.classes.insert(name.to_string(), decl);
        Ok(())
    }

    pub fn declare_bundle(&mut self, name: &str, base: &str, euler: Option<Q>) -> Result<(), MotiveError> {
        self.name_free(name)?;
        self.bundles.insert(name.to_string(), BundleDecl { base: base.to_string(), euler });
        Ok(())
    }

    pub fn declare_morphism(
        &mut self,
        name: &str,
        source: &str,
        target: &str,
        kind: MorphismKind,
    ) -> Result<(), MotiveError> {
        if self.morphisms.contains_key(name) || name == "id" {
            return Err(MotiveError::Duplicate(name.to_string()));
        }
        match &kind {
            MorphismKind::Identity if source != target => {
                return Err(MotiveError::Declaration(format!("identity `{name}` must have equal source and target")));
            }
            MorphismKind::Bundle(GroupKind::Special(g)) => {
                let ok = self.classes.get(g).is_some_and(|c| c.base == POINT && c.invertible && c.order == 1);
                if !ok {
                    return Err(MotiveError::Declaration(format!(
                        "special group `{g}` must be an invertible class over pt with trivial action"
                    )));
                }
            }
            MorphismKind::Composite(parts) => {
                if parts.is_empty() {
                    return Err(MotiveError::Declaration(format!("composite `{name}` is empty")));
                }
                let mut cur = source.to_string();
                for p in parts.iter().rev() {
                    let d = self.morphism(p)?;
                    if d.source != cur {
                        return Err(MotiveError::Composition(format!(
                            "`{p}` starts at {}, but the composite reaches {cur}",
                            d.source
                        )));
                    }
                    cur = d.target.clone();
                }
                if cur != target {
                    return Err(MotiveError::Composition(format!("composite `{name}` ends at {cur}, not {target}")));
                }
            }
            _ => {}
        }
        let decl = MorphismDecl { source: source.to_string(), target: target.to_string(), kind };
        self.morphisms.insert(name.to_string(), decl);
        Ok(())
    }

    pub fn declare_square(&mut self, sq: Square) -> Result<(), MotiveError> {
        let (phi, psi) = (self.morphism(&sq.pull)?.clone(), self.morphism(&sq.push)?.clone());
        let (p, q) = (self.morphism(&sq.new_pull)?.clone(), self.morphism(&sq.new_push)?.clone());
        let ok = phi.target == psi.target && p.target == psi.source && q.target == phi.source && p.source == q.source;
        if !ok {
            return Err(MotiveError::Declaration(format!(
                "square ({}, {}, {}, {}) does not commute on labels",
                sq.pull, sq.push, sq.new_pull, sq.new_push
            )));
        }
        self.squares.push(sq);
        Ok(())
    }

    pub fn declare_rule(&mut self, rule: OdotRule) {
        self.rules.push(rule);
    }

    pub fn morphism(&self, name: &str) -> Result<&MorphismDecl, MotiveError> {
        self.morphisms.get(name).ok_or_else(|| MotiveError::UndeclaredMorphism(name.to_string()))
    }

    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.get(name)
    }

    pub fn bundle(&self, name: &str) -> Option<&BundleDecl> {
        self.bundles.get(name)
    }

    pub fn class_atom(&self, name: &str) -> Result<Atom, MotiveError> {
        let c = self.classes.get(name).ok_or_else(|| MotiveError::UndeclaredSymbol(name.to_string()))?;
        Ok(Atom::Class { name: name.to_string(), base: c.base.clone(), order: c.order, invertible: c.invertible })
    }

    /// `[X, id, ι̂]` or a declared class as an element over its base.
    pub fn class_element(&self, name: &str) -> Result<MotiveElement, MotiveError> {
        let a = self.class_atom(name)?;
        Ok(MotiveElement::atom(&self.classes[name].base, a))
    }

    /// `[P₁ ⊗ … ⊗ P_r]`; the empty product is the trivial double cover `2·1`.
    pub fn torsor(&self, base: &str, bundles: &BTreeSet<String>) -> Result<MotiveElement, MotiveError> {
        self.check_bundles(base, bundles)?;
        if bundles.is_empty() {
            return Ok(MotiveElement::scalar(base, HCoeff::int(2)));
        }
        Ok(MotiveElement::atom(base, Atom::Torsor(bundles.clone())))
    }

    fn check_bundles(&self, base: &str, bundles: &BTreeSet<String>) -> Result<(), MotiveError> {
        for b in bundles {
            let d = self.bundles.get(b).ok_or_else(|| MotiveError::UndeclaredSymbol(b.clone()))?;
            if d.base != base {
                return Err(MotiveError::BaseMismatch { left: d.base.clone(), right: base.to_string() });
            }
        }
        Ok(())
    }

    /// `[X × μ_n]` with the regular action.
    pub fn mu(base: &str, n: u32) -> MotiveElement {
        match n {
            0 | 1 => MotiveElement::scalar(base, HCoeff::int(i64::from(n))),
            2 => MotiveElement::one(base).sub(&MotiveElement::l_half_pow(base, 1)).expect("same base"),
            _ => MotiveElement::atom(base, Atom::Mu(n)),
        }
    }

    /// `Υ(P) = L^(-1/2) ⊙ (1 − [P])`, with `Υ(trivial) = 1`.
    pub fn upsilon(&self, base: &str, bundles: &BTreeSet<String>) -> Result<MotiveElement, MotiveError> {
        self.check_bundles(base, bundles)?;
        if bundles.is_empty() {
            return Ok(MotiveElement::one(base));
        }
        let diff = MotiveElement::one(base).sub(&MotiveElement::atom(base, Atom::Torsor(bundles.clone())))?;
        Ok(diff.scale(&HCoeff::l_half_pow(-1)))
    }

    /// ⊙ with user quotient rules applied.
    pub fn odot(&self, a: &MotiveElement, b: &MotiveElement) -> Result<MotiveElement, MotiveError> {
        self.apply_rules(a.mul_plain(b)?)
    }

    pub fn apply_rules(&self, e: MotiveElement) -> Result<MotiveElement, MotiveError> {
        if self.rules.is_empty() {
            return Ok(e);
        }
        let mut cur = e;
        for _ in 0..RULE_LIMIT {
            let mut changed = false;
            let mut next = MotiveElement::zero(cur.base());
            for (m, c) in cur.terms() {
                match self.rewrite_once(m) {
                    Some(rep) => {
                        changed = true;
                        next = next.add(&rep.scale(c).rebased(cur.base()))?;
                    }
                    None => next.push_term(m.clone(), c.clone()),
                }
            }
            cur = next;
            if !changed {
                return Ok(cur);
            }
        }
        Err(MotiveError::RuleLoop)
    }

    fn rewrite_once(&self, m: &Mono) -> Option<MotiveElement> {
        for r in &self.rules {
            let el = m.0.get(&r.left).copied().unwrap_or(0);
            let er = m.0.get(&r.right).copied().unwrap_or(0);
            let present = if r.left == r.right { el >= 2 } else { el >= 1 && er >= 1 };
            if !present {
                continue;
            }
            let mut rest = m.0.clone();
            for a in [&r.left, &r.right] {
                let e = rest.get_mut(a).expect("present");
                *e -= 1;
                if *e == 0 {
                    rest.remove(a);
                }
            }
            let rest = MotiveElement::term(r.result.base(), Mono(rest), HCoeff::one());
            return rest.mul_plain(&r.result).ok();
        }
        None
    }

    /// The fibre-product ·, with the diagonal action on products.
    pub fn dot(&self, a: &MotiveElement, b: &MotiveElement) -> Result<MotiveElement, MotiveError> {
        if a.mentions_upsilon() || b.mentions_upsilon() {
            return Err(MotiveError::DotOnQuotient);
        }
        let base = a.add(&b.scale(&HCoeff::zero()))?.base().to_string();
        let (ta, tb) = (mu2_basis(a), mu2_basis(b));
        let mut out = MotiveElement::zero(&base);
        for (m1, c1) in &ta {
            for (m2, c2) in &tb {
                let (t1, n1) = split_trivial(m1);
                let (t2, n2) = split_trivial(m2);
                let prod = dot_nontrivial(&n1, &n2);
                let c = c1.mul(c2);
                for (m, k) in prod {
                    let full = t1.mul(&t2).mul(&m);
                    out = out.add(&from_mu2_basis(&base, &full, &HCoeff::from(c.mul(&Coeff::int(k)))))?;
                }
            }
        }
        self.apply_rules(out)
    }

    /// Passage to the quotient ring: `[P] ↦ 1 − L^(1/2) Υ(P)` and Υ fusion,
    /// also inside pushforward labels.
    pub fn mbar(&self, e: &MotiveElement) -> Result<MotiveElement, MotiveError> {
        let base = e.base().to_string();
        let mut out = MotiveElement::zero(&base);
        for (m, c) in e.terms() {
            let mut acc = MotiveElement::scalar(&base, c.clone());
            for (a, &k) in &m.0 {
                let factor = match a {
                    Atom::Torsor(set) => {
                        let y = MotiveElement::atom(&base, Atom::Upsilon(set.clone())).scale(&HCoeff::l_half_pow(1));
                        let f = MotiveElement::one(&base).sub(&y)?;
                        f.pow_plain(k.unsigned_abs())?
                    }
                    Atom::Pushed { map, inner } if mentions_torsor(inner) => {
                        let src = self.morphism(map)?.source.clone();
                        let inner = self.mbar(&MotiveElement::term(&src, inner.clone(), HCoeff::one()))?;
                        self.push(map, &inner)?.pow_plain(k.unsigned_abs())?
                    }
                    _ => MotiveElement::term(&base, Mono(BTreeMap::from([(a.clone(), k)])), HCoeff::one()),
                };
                acc = acc.mul_plain(&factor)?;
            }
            out = out.add(&acc)?;
        }
        self.apply_rules(out)
    }

    /// `mbar(m ⊙ Υ(Q))`.
    pub fn oriented_chart_motive(
        &self,
        m: &MotiveElement,
        q: &BTreeSet<String>,
    ) -> Result<MotiveElement, MotiveError> {
        let y = self.upsilon(m.base(), &fold_bundles(q))?;
        self.mbar(&self.odot(m, &y)?)
    }

    pub fn push(&self, name: &str, e: &MotiveElement) -> Result<MotiveElement, MotiveError> {
        if name == "id" {
            return Ok(e.clone());
        }
        let d = self.morphism(name)?.clone();
        self.check_base(name, &d.source, e)?;
        match &d.kind {
            MorphismKind::Identity => return Ok(e.clone().rebased(&d.target)),
            MorphismKind::Composite(parts) => {
                let mut cur = e.clone();
                for p in parts.iter().rev() {
                    cur = self.push(p, &cur)?;
                }
                return Ok(cur);
            }
            _ => {}
        }
        let mut out = MotiveElement::zero(&d.target);
        for (m, c) in e.terms() {
            let mut keep = Mono::one();
            let mut rest = Mono::one();
            for (a, &k) in &m.0 {
                let piece = Mono(BTreeMap::from([(a.clone(), k)]));
                match a {
                    _ if a.is_point_class() => keep = keep.mul(&piece),
                    Atom::Pulled { map, inner } if map == name => {
                        keep = keep.mul(&Mono(BTreeMap::from([((**inner).clone(), k)])));
                    }
                    Atom::Torsor(s) | Atom::Upsilon(s) if unpull_bundles(name, s).is_some() => {
                        let s = unpull_bundles(name, s).expect("checked");
                        let a = if matches!(a, Atom::Torsor(_)) { Atom::Torsor(s) } else { Atom::Upsilon(s) };
                        keep = keep.mul(&Mono(BTreeMap::from([(a, k)])));
                    }
                    _ => rest = rest.mul(&piece),
                }
            }
            let pushed = match (&d.kind, rest.is_one()) {
                (MorphismKind::Bundle(g), true) => self.group_class(g)?,
                _ => MotiveElement::atom(&d.target, Atom::Pushed { map: name.to_string(), inner: rest }),
            };
            let kept = MotiveElement::term(&d.target, keep, c.clone());
            out = out.add(&kept.mul_plain(&pushed)?.rebased(&d.target))?;
        }
        self.apply_rules(out)
    }

    fn group_class(&self, g: &GroupKind) -> Result<MotiveElement, MotiveError> {
        match g {
            GroupKind::Gl(n) => gl_class(POINT, *n),
            GroupKind::Special(name) => self.class_element(name),
        }
    }

    fn check_base(&self, name: &str, expected: &str, e: &MotiveElement) -> Result<(), MotiveError> {
        if e.base() != expected && !e.is_zero() && e.base() != POINT {
            return Err(MotiveError::MorphismMismatch {
                name: name.to_string(),
                expected: expected.to_string(),
                found: e.base().to_string(),
            });
        }
        Ok(())
    }

    pub fn pull(&self, name: &str, e: &MotiveElement) -> Result<MotiveElement, MotiveError> {
        self.pull_with(name, e, None)
    }

    /// Pullback; a stack morphism uses the stratified atlas of its source.
    pub fn pull_with(
        &self,
        name: &str,
        e: &MotiveElement,
        ctx: Option<&StackContext>,
    ) -> Result<MotiveElement, MotiveError> {
        if name == "id" {
            return Ok(e.clone());
        }
        let d = self.morphism(name)?.clone();
        self.check_base(name, &d.target, e)?;
        match &d.kind {
            MorphismKind::Identity => Ok(e.clone().rebased(&d.source)),
            MorphismKind::Composite(parts) => {
                let mut cur = e.clone();
                for p in parts {
                    cur = self.pull_with(p, &cur, ctx)?;
                }
                Ok(cur)
            }
            MorphismKind::Stack => {
                let ctx = ctx
                    .filter(|c| c.base == d.source)
                    .ok_or_else(|| MotiveError::MissingStratification(name.to_string()))?;
                let mut out = MotiveElement::zero(&d.source);
                for s in &ctx.strata {
                    let label = if s.atlas_map == "id" { name.to_string() } else { format!("{name}.{}", s.atlas_map) };
                    let pulled = self.pull_representable(&label, &s.atlas, e)?;
                    let pushed = self.push(&s.atlas_map, &pulled)?.rebased(&d.source);
                    let w = if s.group == 0 { MotiveElement::one(POINT) } else { gl_class(POINT, s.group)?.inverse()? };
                    out = out.add(&w.mul_plain(&pushed)?)?;
                }
                self.apply_rules(out)
            }
            _ => self.pull_representable(name, &d.source, e),
        }
    }

    fn pull_representable(&self, name: &str, source: &str, e: &MotiveElement) -> Result<MotiveElement, MotiveError> {
        let mut out = MotiveElement::zero(source);
        for (m, c) in e.terms() {
            let mut acc = MotiveElement::scalar(source, c.clone());
            for (a, &k) in &m.0 {
                let f = self.pull_atom(name, source, a)?;
                let f = if k >= 0 { f.pow_plain(k as u32)? } else { f.inverse()?.pow_plain(k.unsigned_abs())? };
                acc = acc.mul_plain(&f)?;
            }
            out = out.add(&acc.rebased(source))?;
        }
        self.apply_rules(out)
    }

    fn pull_atom(&self, name: &str, source: &str, a: &Atom) -> Result<MotiveElement, MotiveError> {
        let single = |a: Atom| MotiveElement::atom(source, a);
        Ok(match a {
            _ if a.is_point_class() => single(a.clone()),
            Atom::Mu(n) => single(Atom::Mu(*n)),
            Atom::Torsor(s) => single(Atom::Torsor(s.iter().map(|b| format!("{name}^*{b}")).collect())),
            Atom::Upsilon(s) => single(Atom::Upsilon(s.iter().map(|b| format!("{name}^*{b}")).collect())),
            Atom::Pushed { map, inner } => {
                let bundle = self.morphisms.get(name).and_then(|d| match &d.kind {
                    MorphismKind::Bundle(g) if map == name => Some(g.clone()),
                    _ => None,
                });
                if let Some(g) = bundle {
                    let inner = MotiveElement::term(source, inner.clone(), HCoeff::one());
                    return self.group_class(&g)?.mul_plain(&inner);
                }
                if let Some(sq) = self.squares.iter().find(|s| s.pull == name && &s.push == map) {
                    let src = self.morphism(map)?.source.clone();
                    let inner = MotiveElement::term(&src, inner.clone(), HCoeff::one());
                    let p = self.pull(&sq.new_pull, &inner)?;
                    return self.push(&sq.new_push, &p);
                }
                single(Atom::Pulled { map: name.to_string(), inner: Box::new(a.clone()) })
            }
            _ => single(Atom::Pulled { map: name.to_string(), inner: Box::new(a.clone()) }),
        })
    }

    /// `Σ_j (ι_j)_*([S_j ×_X X_j]^{-1}) ⊙ (φ_j)_*(L^{n_j/2} ⊙ MF_j)`.
    pub fn assemble_stack_motive(
        &self,
        ctx: &StackContext,
        data: &[StratumData],
    ) -> Result<MotiveElement, MotiveError> {
        if ctx.strata.len() != data.len() {
            return Err(MotiveError::MismatchedStrata { expected: ctx.strata.len(), found: data.len() });
        }
        let mut out = MotiveElement::zero(&ctx.base);
        for (s, dj) in ctx.strata.iter().zip(data) {
            let atlas_class = match &dj.atlas_class {
                Some(a) => a.clone(),
                None if s.inclusion == "id" => self.push(&s.atlas_map, &MotiveElement::one(&s.atlas))?,
                None => return Err(MotiveError::NotInvertible(format!("[{} x {}] (undeclared)", s.atlas, s.label))),
            };
            let inv = self.push(&s.inclusion, &atlas_class.inverse()?)?;
            let shifted = dj.chart_motive.scale(&HCoeff::l_half_pow(i64::from(dj.rel_dim)));
            let pushed = self.push(&s.atlas_map, &shifted)?;
            out = out.add(&self.odot(&inv, &pushed)?.rebased(&ctx.base))?;
        }
        Ok(out)
    }

    /// Euler characteristic with `L^(1/2) ↦ −1`; `table` overrides declared values
    /// and supplies values for composite symbols by their printed form.
    pub fn euler(&self, e: &MotiveElement, table: &BTreeMap<String, Q>) -> Result<Q, MotiveError> {
        let mut total = Q::zero();
        for (m, c) in e.terms() {
            total += c.euler()? * self.euler_mono(m, table)?;
        }
        Ok(total)
    }

    fn euler_mono(&self, m: &Mono, table: &BTreeMap<String, Q>) -> Result<Q, MotiveError> {
        let mut acc = Q::one();
        for (a, &k) in &m.0 {
            let v = self.euler_atom(a, table)?;
            if k < 0 && v.is_zero() {
                return Err(MotiveError::NotInvertible(format!("Euler value of {a} is 0")));
            }
            acc *= num_traits::pow::pow(if k < 0 { v.recip() } else { v }, k.unsigned_abs() as usize);
        }
        Ok(acc)
    }

    fn euler_atom(&self, a: &Atom, table: &BTreeMap<String, Q>) -> Result<Q, MotiveError> {
        if let Some(v) = table.get(&a.to_string()) {
            return Ok(v.clone());
        }
        let undeclared = || MotiveError::UndeclaredEuler(a.to_string());
        match a {
            Atom::Mu(n) => Ok(Q::from_integer((*n).into())),
            Atom::Class { name, .. } => {
                table.get(name).cloned().or_else(|| self.classes.get(name)?.euler.clone()).ok_or_else(undeclared)
            }
            Atom::Torsor(s) => self.euler_torsor(s, table).ok_or_else(undeclared),
            Atom::Upsilon(s) => {
                let t = self.euler_torsor(s, table).ok_or_else(undeclared)?;
                Ok(t - Q::one())
            }
            Atom::Pushed { inner, .. } => self.euler_mono(inner, table),
            _ => Err(undeclared()),
        }
    }

    fn euler_torsor(&self, s: &BTreeSet<String>, table: &BTreeMap<String, Q>) -> Option<Q> {
        if let Some(v) = table.get(&Atom::Torsor(s.clone()).to_string()) {
            return Some(v.clone());
        }
        match s.iter().collect::<Vec<_>>().as_slice() {
            [one] => table.get(*one).cloned().or_else(|| self.bundles.get(*one)?.euler.clone()),
            _ => None,
        }
    }
}

fn mentions_torsor(m: &Mono) -> bool {
    m.0.keys().any(|a| match a {
        Atom::Torsor(_) => true,
        Atom::Pushed { inner, .. } => mentions_torsor(inner),
        _ => false,
    })
}

/// Bundles appearing an even number of times cancel in a tensor product.
pub fn fold_bundles<'a>(names: impl IntoIterator<Item = &'a String>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for n in names {
        if !out.remove(n) {
            out.insert(n.clone());
        }
    }
    out
}

/// The bundles of a set pulled back along `map`, if all of them are.
fn unpull_bundles(map: &str, s: &BTreeSet<String>) -> Option<BTreeSet<String>> {
    let prefix = format!("{map}^*");
    s.iter().map(|b| b.strip_prefix(&prefix).map(str::to_string)).collect()
}

/// Rewrite `L^(1/2)` as `1 − [μ₂]` so that · can act on symbols only.
fn mu2_basis(e: &MotiveElement) -> Vec<(Mono, Coeff)> {
    let mut out = Vec::new();
    for (m, c) in e.terms() {
        let sum = c.even.add(&c.odd);
        if !sum.is_zero() {
            out.push((m.clone(), sum));
        }
        if !c.odd.is_zero() {
            out.push((m.mul(&Mono::atom(Atom::Mu(2))), c.odd.neg()));
        }
    }
    out
}

fn from_mu2_basis(base: &str, m: &Mono, c: &HCoeff) -> MotiveElement {
    let k = m.0.get(&Atom::Mu(2)).copied().unwrap_or(0);
    let rest = MotiveElement::term(base, m.without(&Atom::Mu(2)), c.clone());
    if k == 0 {
        return rest;
    }
    let mu2 = Universe::mu(base, 2).pow_plain(k as u32).expect("same base");
    rest.mul_plain(&mu2).expect("same base")
}

fn split_trivial(m: &Mono) -> (Mono, Mono) {
    let mut t = BTreeMap::new();
    let mut n = BTreeMap::new();
    for (a, &k) in &m.0 {
        if a.order() == 1 {
            t.insert(a.clone(), k);
        } else {
            n.insert(a.clone(), k);
        }
    }
    (Mono(t), Mono(n))
}

fn single_atom(m: &Mono) -> Option<&Atom> {
    match m.0.iter().collect::<Vec<_>>().as_slice() {
        [(a, 1)] => Some(*a),
        _ => None,
    }
}

fn fibre_factors(m: &Mono) -> Vec<Mono> {
    match single_atom(m) {
        Some(Atom::Fibre(v)) => v.clone(),
        _ => vec![m.clone()],
    }
}

/// · on nontrivial parts, as a list of (monomial, integer multiplicity).
fn dot_nontrivial(a: &Mono, b: &Mono) -> Vec<(Mono, i64)> {
    if a.is_one() {
        return vec![(b.clone(), 1)];
    }
    if b.is_one() {
        return vec![(a.clone(), 1)];
    }
    if let (Some(x), Some(y)) = (single_atom(a), single_atom(b)) {
        match (x, y) {
            (Atom::Mu(n), Atom::Mu(m)) => return vec![(Mono::atom(Atom::Mu(n.lcm(m))), i64::from(n.gcd(m)))],
            (Atom::Torsor(p), Atom::Torsor(q)) if p == q => return vec![(a.clone(), 2)],
            _ => {}
        }
    }
    let mut factors = fibre_factors(a);
    factors.extend(fibre_factors(b));
    factors.sort();
    vec![(Mono::atom(Atom::Fibre(factors)), 1)]
}
