//! Darboux-form models of k-shifted symplectic derived schemes.
//!
//! Coordinates come in pairs `(x, y)` with `|x| = -i`, `|y| = k + i`, plus a
//! self-paired block `z` of degree `k/2` when `k ≡ 2 mod 4`, plus unpaired
//! stacky generators `w` of degree `k - 1`. The 2-form is
//! `ω⁰ = Σ dR(y)·dR(x) + Σ dR(z)·dR(z)` and the differential is the
//! Hamiltonian vector field of `H`, i.e. `ι_d ω⁰ = dR(H)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::cdga::{CdgaError, Point, StandardFormCdga};
use crate::graded::{q, qf, AlgebraElement, Derivation, GeneratorSet, GradedError, Q};
use crate::linalg::Matrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DarbouxError {
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Cdga(#[from] CdgaError),
    #[error("malformed degrees: {0}")]
    Layout(String),
    #[error("H must be homogeneous of degree {expected}")]
    HamiltonianDegree { expected: i32 },
    #[error("H must not involve the stacky generator `{0}`")]
    HamiltonianUsesStacky(String),
    #[error("master equation fails: residual {residual}")]
    MasterEquation { residual: String },
    #[error("image of `{gen}` must have degree {expected}")]
    StackyImageDegree { gen: String, expected: i32 },
    #[error("identity {name} fails: residual {residual}")]
    Identity { name: String, residual: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Odd,
    Div4,
    Strong2Mod4,
    Stacky,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Odd => "odd",
            Classification::Div4 => "div4",
            Classification::Strong2Mod4 => "strong2mod4",
            Classification::Stacky => "stacky",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pair {
    pub x: String,
    pub y: String,
    /// `|x| = -i`.
    pub i: i32,
}

/// Names and degrees of a Darboux chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DarbouxLayout {
    pub k: i32,
    pub pairs: Vec<Pair>,
    pub selfs: Vec<String>,
    pub stacky: Vec<String>,
}

impl DarbouxLayout {
    /// Layout with generated names: `x{i}_{j}`, `y{i}_{j}`, `z_{j}`, `w_{j}`.
    pub fn standard(k: i32, counts: &[usize], z: usize, w: usize) -> Self {
        let mut pairs = Vec::new();
        for (i, &m) in counts.iter().enumerate() {
            for j in 1..=m {
                pairs.push(Pair { x: format!("x{i}_{j}"), y: format!("y{i}_{j}"), i: i as i32 });
            }
        }
        DarbouxLayout {
            k,
            pairs,
            selfs: (1..=z).map(|j| format!("z_{j}")).collect(),
            stacky: (1..=w).map(|j| format!("w_{j}")).collect(),
        }
    }

    pub fn classification(&self) -> Classification {
        if !self.stacky.is_empty() {
            Classification::Stacky
        } else if self.k % 2 != 0 {
            Classification::Odd
        } else if self.k % 4 == 0 {
            Classification::Div4
        } else {
            Classification::Strong2Mod4
        }
    }

    pub fn validate(&self) -> Result<(), DarbouxError> {
        let k = self.k;
        if k >= 0 {
            return Err(DarbouxError::Layout(format!("k = {k} must be negative")));
        }
        for p in &self.pairs {
            let ok = p.i >= 0 && (2 * p.i < -k || (2 * p.i == -k && k % 4 == 0));
            if !ok {
                return Err(DarbouxError::Layout(format!(
                    "pair ({}, {}) with |x| = {} is not allowed for k = {k}",
                    p.x, p.y, -p.i
                )));
            }
        }
        if !self.selfs.is_empty() && (k % 4 + 4) % 4 != 2 {
            return Err(DarbouxError::Layout(format!(
                "self-paired generators need k ≡ 2 mod 4, got k = {k}"
            )));
        }
        Ok(())
    }

    pub fn generator_set(&self) -> Result<Arc<GeneratorSet>, DarbouxError> {
        self.validate()?;
        let mut gens: Vec<(String, i32)> = Vec::new();
        let mut pairs: Vec<&Pair> = self.pairs.iter().collect();
        pairs.sort_by_key(|p| p.i);
        for p in &pairs {
            gens.push((p.x.clone(), -p.i));
        }
        for z in &self.selfs {
            gens.push((z.clone(), self.k / 2));
        }
        for p in &pairs {
            gens.push((p.y.clone(), self.k + p.i));
        }
        for w in &self.stacky {
            gens.push((w.clone(), self.k - 1));
        }
        Ok(GeneratorSet::new(gens)?)
    }
}

/// A Darboux chart before verification: layout, Hamiltonian, stacky images.
#[derive(Debug, Clone)]
pub struct DarbouxSpec {
    pub layout: DarbouxLayout,
    set: Arc<GeneratorSet>,
    pub hamiltonian: AlgebraElement,
    pub stacky_images: BTreeMap<String, AlgebraElement>,
}

struct Idx {
    x: usize,
    y: usize,
    i: i32,
}

impl DarbouxSpec {
    pub fn new(layout: DarbouxLayout, hamiltonian: AlgebraElement) -> Result<Self, DarbouxError> {
        let set = layout.generator_set()?;
        let hamiltonian = hamiltonian.embed(&set)?;
        let spec = DarbouxSpec { layout, set, hamiltonian, stacky_images: BTreeMap::new() };
        spec.check_hamiltonian()?;
        Ok(spec)
    }

    /// Spec whose Hamiltonian is built over the layout's own generator set.
    pub fn with<F>(layout: DarbouxLayout, h: F) -> Result<Self, DarbouxError>
    where
        F: FnOnce(&Arc<GeneratorSet>) -> Result<AlgebraElement, GradedError>,
    {
        let set = layout.generator_set()?;
        let hamiltonian = h(&set)?;
        let spec = DarbouxSpec { layout, set, hamiltonian, stacky_images: BTreeMap::new() };
        spec.check_hamiltonian()?;
        Ok(spec)
    }

    pub fn set_stacky_image(&mut self, w: &str, image: AlgebraElement) -> Result<(), DarbouxError> {
        let g = self.set.index_of(w)?;
        if !self.layout.stacky.iter().any(|s| s == w) {
            return Err(DarbouxError::Layout(format!("`{w}` is not a stacky generator")));
        }
        let image = image.embed(&self.set)?;
        let expected = self.set.get(g).degree + 1;
        if !image.is_homogeneous_of(expected) || image.max_form_weight() > 0 {
            return Err(DarbouxError::StackyImageDegree { gen: w.to_string(), expected });
        }
        self.stacky_images.insert(w.to_string(), image);
        Ok(())
    }

    pub fn set(&self) -> &Arc<GeneratorSet> {
        &self.set
    }

    fn check_hamiltonian(&self) -> Result<(), DarbouxError> {
        let expected = self.layout.k + 1;
        if !self.hamiltonian.is_homogeneous_of(expected) || self.hamiltonian.max_form_weight() > 0 {
            return Err(DarbouxError::HamiltonianDegree { expected });
        }
        for w in &self.layout.stacky {
            if self.hamiltonian.mentions(self.set.index_of(w)?) {
                return Err(DarbouxError::HamiltonianUsesStacky(w.clone()));
            }
        }
        Ok(())
    }

    fn pair_indices(&self) -> Vec<Idx> {
        self.layout
            .pairs
            .iter()
            .map(|p| Idx {
                x: self.set.lookup(&p.x).expect("layout name"),
                y: self.set.lookup(&p.y).expect("layout name"),
                i: p.i,
            })
            .collect()
    }

    fn self_indices(&self) -> Vec<usize> {
        self.layout
            .selfs
            .iter()
            .map(|z| self.set.lookup(z).expect("layout name"))
            .collect()
    }

    fn deg(&self, g: usize) -> i32 {
        self.set.get(g).degree
    }

    /// The Hamiltonian vector field `X_a` of a homogeneous `a`, of degree `|a| - k`.
    fn hamiltonian_field(&self, a: &AlgebraElement, degree: i32) -> Derivation {
        let s = degree - self.layout.k;
        let mut images = BTreeMap::new();
        for p in self.pair_indices() {
            let (dx, dy) = (self.deg(p.x), self.deg(p.y));
            let ex = sign((s + 1) * (dy + 1));
            let ey = sign((dy + s) * (dx + 1));
            images.insert(p.x, a.partial(p.y).scale(&ex));
            images.insert(p.y, a.partial(p.x).scale(&ey));
        }
        for z in self.self_indices() {
            images.insert(z, a.partial(z).scale(&qf(1, 2)));
        }
        Derivation::new(&self.set, s, images).expect("images over the spec set")
    }

    /// `{a, b} = X_a(b)`, extended bilinearly over homogeneous components.
    pub fn poisson_bracket(
        &self,
        a: &AlgebraElement,
        b: &AlgebraElement,
    ) -> Result<AlgebraElement, DarbouxError> {
        let a = a.embed(&self.set)?;
        let b = b.embed(&self.set)?;
        let mut out = AlgebraElement::zero(&self.set);
        for (deg, comp) in a.components() {
            let field = self.hamiltonian_field(&comp, deg);
            out = &out + &field.apply(&b)?;
        }
        Ok(out)
    }

    /// The classical master equation residual, zero iff `{H, H} = 0`.
    pub fn master_equation_residual(&self) -> AlgebraElement {
        let h = &self.hamiltonian;
        match self.layout.classification_without_stacky() {
            Classification::Div4 => self
                .poisson_bracket(h, h)
                .expect("same set")
                .scale(&qf(1, 2)),
            cls => {
                let mut out = AlgebraElement::zero(&self.set);
                for p in self.pair_indices() {
                    let eps = if cls == Classification::Odd { Q::one() } else { sign(p.i + 1) };
                    out = &out + &(&h.partial(p.x) * &h.partial(p.y)).scale(&eps);
                }
                for z in self.self_indices() {
                    let dz = h.partial(z);
                    out = &out + &(&dz * &dz).scale(&qf(1, 4));
                }
                out
            }
        }
    }

    /// The differential on generators: `d x = ∂H/∂y`, `d y = ± ∂H/∂x`,
    /// `d z = ½ ∂H/∂z`, `d w` as supplied.
    pub fn differential_images(&self) -> BTreeMap<usize, AlgebraElement> {
        let field = self.hamiltonian_field(&self.hamiltonian, self.layout.k + 1);
        let mut images = field.images().clone();
        for (w, img) in &self.stacky_images {
            images.insert(self.set.lookup(w).expect("stacky name"), img.clone());
        }
        images
    }

    pub fn omega0(&self) -> AlgebraElement {
        let mut out = AlgebraElement::zero(&self.set);
        for p in self.pair_indices() {
            let dy = AlgebraElement::sym(&self.set, crate::graded::Sym::form(p.y));
            let dx = AlgebraElement::sym(&self.set, crate::graded::Sym::form(p.x));
            out = &out + &(&dy * &dx);
        }
        for z in self.self_indices() {
            let dz = AlgebraElement::sym(&self.set, crate::graded::Sym::form(z));
            out = &out + &(&dz * &dz);
        }
        out
    }

    /// Euler vector field `g ↦ -|g|·g` on the paired generators.
    fn euler_field(&self) -> Derivation {
        let mut images = BTreeMap::new();
        let mut paired: Vec<usize> = self.self_indices();
        for p in self.pair_indices() {
            paired.push(p.x);
            paired.push(p.y);
        }
        for g in paired {
            let v = AlgebraElement::sym(&self.set, crate::graded::Sym::alg(g));
            images.insert(g, v.scale(&q(-i64::from(self.deg(g)))));
        }
        Derivation::new(&self.set, 0, images).expect("images over the spec set")
    }

    /// `Φ = H / k` (equal to `-H/(2d+1)` for `k = -2d-1`).
    pub fn big_phi(&self) -> AlgebraElement {
        self.hamiltonian.scale(&qf(1, i64::from(self.layout.k)))
    }

    /// `φ = -(1/k) ι_E ω⁰`, whose de Rham differential is `ω⁰`.
    pub fn small_phi(&self) -> AlgebraElement {
        let contracted = self.euler_field().contract(&self.omega0()).expect("2-form");
        contracted.scale(&qf(-1, i64::from(self.layout.k)))
    }
}

impl DarbouxLayout {
    fn classification_without_stacky(&self) -> Classification {
        DarbouxLayout { stacky: Vec::new(), ..self.clone() }.classification()
    }
}

fn sign(e: i32) -> Q {
    if e.rem_euclid(2) == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

/// A verified Darboux model.
#[derive(Debug, Clone)]
pub struct DarbouxModel {
    pub spec: DarbouxSpec,
    pub cdga: StandardFormCdga,
    pub omega0: AlgebraElement,
    pub big_phi: AlgebraElement,
    pub small_phi: AlgebraElement,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub residual: AlgebraElement,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.residual.is_zero()
    }
}

pub fn build_darboux(spec: &DarbouxSpec) -> Result<DarbouxModel, DarbouxError> {
    let residual = spec.master_equation_residual();
    if !residual.is_zero() {
        return Err(DarbouxError::MasterEquation { residual: residual.to_string() });
    }
    let cdga = StandardFormCdga::build(spec.set(), spec.differential_images())?;
    let model = DarbouxModel {
        omega0: spec.omega0(),
        big_phi: spec.big_phi(),
        small_phi: spec.small_phi(),
        classification: spec.layout.classification(),
        cdga,
        spec: spec.clone(),
    };
    for check in model.identity_checks() {
        if !check.passed() {
            return Err(DarbouxError::Identity {
                name: check.name.to_string(),
                residual: check.residual.to_string(),
            });
        }
    }
    Ok(model)
}

/// Same as [`build_darboux`]; stacky images default to zero.
pub fn build_stacky_darboux(spec: &DarbouxSpec) -> Result<DarbouxModel, DarbouxError> {
    build_darboux(spec)
}

impl DarbouxModel {
    pub fn set(&self) -> &Arc<GeneratorSet> {
        self.cdga.set()
    }

    fn d(&self, a: &AlgebraElement) -> AlgebraElement {
        self.cdga.apply_d(a)
    }

    /// The closedness and primitive identities, each as a residual.
    pub fn identity_checks(&self) -> Vec<IdentityCheck> {
        let set = self.set();
        let mut d2 = AlgebraElement::zero(set);
        for g in 0..set.len() {
            let dd = self.d(&self.cdga.d().image(g));
            d2 = &d2 + &dd;
        }
        let phi = &self.small_phi;
        vec![
            IdentityCheck { name: "master", residual: self.spec.master_equation_residual() },
            IdentityCheck { name: "d^2", residual: d2 },
            IdentityCheck { name: "dPhi", residual: self.d(&self.big_phi) },
            IdentityCheck {
                name: "dR(Phi)+d(phi)",
                residual: &self.big_phi.de_rham() + &self.d(phi),
            },
            IdentityCheck { name: "dR(phi)-omega0", residual: &phi.de_rham() - &self.omega0 },
            IdentityCheck { name: "d(omega0)", residual: self.d(&self.omega0) },
            IdentityCheck { name: "dR(omega0)", residual: self.omega0.de_rham() },
        ]
    }

    /// `d(g) - {H, g}` for every generator of the paired subalgebra.
    pub fn bracket_checks(&self) -> Vec<(String, AlgebraElement)> {
        let set = self.set();
        let h = &self.spec.hamiltonian;
        (0..set.len())
            .filter(|&g| !self.spec.layout.stacky.contains(&set.get(g).name))
            .map(|g| {
                let gen = AlgebraElement::sym(set, crate::graded::Sym::alg(g));
                let br = self.spec.poisson_bracket(h, &gen).expect("same set");
                (set.get(g).name.clone(), &self.cdga.d().image(g) - &br)
            })
            .collect()
    }

    /// `Φ - Φ(p)`, the potential normalized at a base point.
    pub fn normalized_big_phi(&self, p: &Point) -> Result<AlgebraElement, DarbouxError> {
        let v = self.big_phi.evaluate(p)?;
        Ok(&self.big_phi - &AlgebraElement::constant(self.set(), v))
    }

    /// Names of the generators of the paired subalgebra `B ⊂ A`.
    pub fn subalgebra_generators(&self) -> Vec<String> {
        self.set()
            .gens()
            .iter()
            .filter(|g| !self.spec.layout.stacky.contains(&g.name))
            .map(|g| g.name.clone())
            .collect()
    }

    pub fn is_minimal_at(&self, p: &Point) -> Result<bool, DarbouxError> {
        Ok(self.cdga.is_minimal_at(p)?)
    }
}

/// Whether the pairing of `ω` between degrees `e` and `k - e` is invertible at `p`
/// for every `e`, where `k` is the degree of `ω`.
pub fn nondegenerate_at(
    omega: &AlgebraElement,
    set: &Arc<GeneratorSet>,
    p: &Point,
) -> Result<bool, DarbouxError> {
    for g in set.gens() {
        if g.degree == 0 && !p.contains_key(&g.name) {
            return Err(CdgaError::InvalidPoint(format!("no value for `{}`", g.name)).into());
        }
    }
    if set.is_empty() {
        return Ok(true);
    }
    let Some(k) = omega.homogeneous_degree() else {
        return Ok(false);
    };
    if omega.min_form_weight() != 2 || omega.max_form_weight() != 2 {
        return Ok(false);
    }
    let mut by_degree: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (g, gen) in set.gens().iter().enumerate() {
        by_degree.entry(gen.degree).or_default().push(g);
    }
    let contracted: Vec<AlgebraElement> = (0..set.len())
        .map(|g| Derivation::partial(set, g).contract(omega).expect("2-form"))
        .collect();
    for (&e, rows) in &by_degree {
        let cols = by_degree.get(&(k - e)).cloned().unwrap_or_default();
        if cols.len() != rows.len() {
            return Ok(false);
        }
        let mut m = Matrix::zeros(rows.len(), cols.len());
        for (i, &g) in rows.iter().enumerate() {
            for (j, &h) in cols.iter().enumerate() {
                let w = Derivation::partial(set, h).contract(&contracted[g]);
                let v = match w {
                    Ok(w) => w.evaluate(p)?,
                    Err(_) => Q::zero(),
                };
                m.set(i, j, v);
            }
        }
        if m.rank() != rows.len() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crit_of_square() {
        let layout = DarbouxLayout {
            k: -1,
            pairs: vec![Pair { x: "x".into(), y: "y".into(), i: 0 }],
            selfs: vec![],
            stacky: vec![],
        };
        let spec = DarbouxSpec::with(layout, |s| {
            let x = AlgebraElement::gen(s, "x")?;
            Ok(&x * &x)
        })
        .unwrap();
        let m = build_darboux(&spec).unwrap();
        let s = m.set().clone();
        let x = AlgebraElement::gen(&s, "x").unwrap();
        let y = AlgebraElement::gen(&s, "y").unwrap();
        let dx = AlgebraElement::form_of(&s, "x").unwrap();
        let dy = AlgebraElement::form_of(&s, "y").unwrap();
        assert_eq!(m.cdga.d().image(1), x.scale(&q(2)));
        assert_eq!(m.omega0, &dy * &dx);
        assert_eq!(m.big_phi, (&x * &x).neg());
        assert_eq!(m.small_phi, &y * &dx);
    }

    #[test]
    fn residual_example() {
        let layout = DarbouxLayout::standard(-3, &[0, 2], 0, 0);
        let spec = DarbouxSpec::with(layout, |s| {
            let a = AlgebraElement::gen(s, "x1_1")?;
            let b = AlgebraElement::gen(s, "x1_2")?;
            let y = AlgebraElement::gen(s, "y1_1")?;
            Ok(&(&a * &b) + &y)
        })
        .unwrap();
        let r = spec.master_equation_residual();
        let x2 = AlgebraElement::gen(spec.set(), "x1_2").unwrap();
        assert!(r == x2 || r == x2.neg());
        assert!(matches!(build_darboux(&spec), Err(DarbouxError::MasterEquation { .. })));
    }
}

#[cfg(test)]
mod model_tests {
    use super::*;
    use crate::expr::parse_element;

    fn check(k: i32, counts: &[usize], z: usize, h: &str) {
        let layout = DarbouxLayout::standard(k, counts, z, 0);
        let spec = DarbouxSpec::with(layout, |s| Ok(parse_element(h, s).unwrap())).unwrap();
        let m = build_darboux(&spec).unwrap_or_else(|e| panic!("k={k} H={h}: {e}"));
        for (g, r) in m.bracket_checks() {
            assert!(r.is_zero(), "{g}: {r}");
        }
        let p: Point = m.cdga.base_names().into_iter().map(|n| (n, q(3))).collect();
        assert!(nondegenerate_at(&m.omega0, m.set(), &p).unwrap());
    }

    #[test]
    fn sign_conventions_across_k() {
        check(-1, &[2], 0, "x0_1^3*x0_2 - x0_2^2");
        check(-3, &[2, 2], 0, "y1_1*x0_1^2 + y1_2*x0_2");
        check(-5, &[1, 1, 1], 0, "y1_1*x0_1 + x2_1^2");
        check(-5, &[1, 2, 1], 0, "x1_1*x1_2*x2_1*x0_1");
        check(-2, &[1], 2, "0");
        check(-6, &[1, 2, 1], 1, "z_1*x1_1*x1_2 + x1_1*x2_1*x2_1");
        check(-4, &[1, 2, 1], 0, "x1_1*x2_1*x0_1 + x1_1*x1_2*x1_1");
        check(-4, &[2, 2, 1], 0, "y1_1*x0_1^2 + y1_2*x0_1*x0_2");
    }
}
