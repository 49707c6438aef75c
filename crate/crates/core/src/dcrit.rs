//! Derived critical loci, critical charts, overlap gluing and pointwise
//! d-critical numerics.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::cdga::Point;
use crate::darboux::{build_darboux, DarbouxError, DarbouxLayout, DarbouxModel, DarbouxSpec, Pair};
use crate::graded::{AlgebraElement, GeneratorSet, GradedError, Monomial, Sym, Q};
use crate::linalg::Matrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DcritError {
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Darboux(#[from] DarbouxError),
    #[error("{0} is not a polynomial in degree-0 coordinates")]
    NotPolynomial(String),
    #[error("point is not critical: {0} ≠ 0")]
    NotCritical(String),
    #[error("degree bound {bound} is below deg(f∘θ − f′∘θ′) = {degree}")]
    BoundTooSmall { bound: u32, degree: u32 },
    #[error("coordinate map does not cover `{0}`")]
    MissingImage(String),
}

fn check_polynomial(f: &AlgebraElement) -> Result<(), DcritError> {
    let set = f.set();
    if set.gens().iter().any(|g| g.degree != 0) || f.max_form_weight() > 0 {
        return Err(DcritError::NotPolynomial(f.to_string()));
    }
    Ok(())
}

/// Name of the degree −1 partner of the coordinate `x`.
pub fn dual_name(x: &str) -> String {
    format!("y_{x}")
}

/// The k = −1 Darboux model with `H = f` and `d y_j = ∂f/∂x_j`.
pub fn derived_crit(f: &AlgebraElement) -> Result<DarbouxModel, DcritError> {
    check_polynomial(f)?;
    let layout = DarbouxLayout {
        k: -1,
        pairs: f
            .set()
            .gens()
            .iter()
            .map(|g| Pair { x: g.name.clone(), y: dual_name(&g.name), i: 0 })
            .collect(),
        selfs: Vec::new(),
        stacky: Vec::new(),
    };
    let spec = DarbouxSpec::new(layout, f.clone())?;
    Ok(build_darboux(&spec)?)
}

pub fn jacobian(f: &AlgebraElement) -> Vec<AlgebraElement> {
    (0..f.set().len()).map(|j| f.partial(j)).collect()
}

pub fn hessian_at(f: &AlgebraElement, p: &Point) -> Result<Matrix, DcritError> {
    let n = f.set().len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        let fi = f.partial(i);
        for j in 0..n {
            m.set(i, j, fi.partial(j).evaluate(p)?);
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointDims {
    pub hessian: Matrix,
    pub rank: usize,
    pub tangent_dim: usize,
    /// Dimensions of `0 → T_xX → T U → T* U → T*_xX → 0`.
    pub sequence: [usize; 4],
    /// `K_{X,s}|_x ≅ (Λ^top T*_xX)^{⊗2}` has this many cotangent factors.
    pub canonical_exponent: usize,
}

pub fn point_dims(f: &AlgebraElement, p: &Point) -> Result<PointDims, DcritError> {
    check_polynomial(f)?;
    for g in jacobian(f) {
        if !g.evaluate(p)?.is_zero() {
            return Err(DcritError::NotCritical(g.to_string()));
        }
    }
    let hessian = hessian_at(f, p)?;
    let rank = hessian.rank();
    let m = f.set().len();
    let t = m - rank;
    Ok(PointDims { hessian, rank, tangent_dim: t, sequence: [t, m, m, t], canonical_exponent: 2 * t })
}

/// A critical chart `(R, U, f, i)` with `U` affine space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalChart {
    pub f: AlgebraElement,
    pub base_point: Option<Point>,
}

impl CriticalChart {
    pub fn new(f: AlgebraElement, base_point: Option<Point>) -> Result<Self, DcritError> {
        check_polynomial(&f)?;
        Ok(CriticalChart { f, base_point })
    }

    pub fn coordinates(&self) -> Vec<String> {
        self.f.set().gens().iter().map(|g| g.name.clone()).collect()
    }

    pub fn jacobian(&self) -> Vec<AlgebraElement> {
        jacobian(&self.f)
    }

    /// The chart with `f` replaced by `f - f(p)`.
    pub fn normalized_at(&self, p: &Point) -> Result<Self, DcritError> {
        let v = self.f.evaluate(p)?;
        Ok(CriticalChart {
            f: &self.f - &AlgebraElement::constant(self.f.set(), v),
            base_point: Some(p.clone()),
        })
    }
}

/// Pointwise form of `s|_R = f + I²`: `p` is critical and the representative
/// vanishes there.
pub fn chart_section_check(chart: &CriticalChart, p: &Point) -> Result<bool, DcritError> {
    for g in chart.jacobian() {
        if !g.evaluate(p)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(chart.f.evaluate(p)?.is_zero())
}

#[derive(Debug, Clone)]
pub struct GlueDatum {
    pub v: Arc<GeneratorSet>,
    pub ideal: Vec<AlgebraElement>,
    pub f: AlgebraElement,
    pub f_prime: AlgebraElement,
    /// Images of the coordinates of `f`'s space, as polynomials on `V`.
    pub theta: BTreeMap<String, AlgebraElement>,
    pub theta_prime: BTreeMap<String, AlgebraElement>,
    pub bound: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlueOutcome {
    pub member: bool,
    pub bound: u32,
    pub difference: AlgebraElement,
    /// Cofactors `c_ab` with `Σ c_ab g_a g_b = f∘θ − f′∘θ′` (`a ≤ b`).
    pub certificate: Vec<((usize, usize), AlgebraElement)>,
}

fn pull_back(
    f: &AlgebraElement,
    theta: &BTreeMap<String, AlgebraElement>,
    v: &Arc<GeneratorSet>,
) -> Result<AlgebraElement, DcritError> {
    let mut images = BTreeMap::new();
    for (g, gen) in f.set().gens().iter().enumerate() {
        let img = theta
            .get(&gen.name)
            .ok_or_else(|| DcritError::MissingImage(gen.name.clone()))?;
        images.insert(g, img.embed(v)?);
    }
    Ok(f.substitute(v, &images)?)
}

fn monomials_up_to(n: usize, d: u32) -> Vec<Monomial> {
    let mut out = vec![Vec::new()];
    for var in 0..n {
        let mut next = Vec::new();
        for m in &out {
            let used: u32 = m.iter().map(|&(_, e)| e).sum();
            next.push(m.clone());
            for e in 1..=(d - used) {
                let mut m2 = m.clone();
                m2.push((Sym::alg(var), e));
                next.push(m2);
            }
        }
        out = next;
    }
    out.into_iter().map(Monomial).collect()
}

impl GlueDatum {
    pub fn difference(&self) -> Result<AlgebraElement, DcritError> {
        for g in &self.ideal {
            check_polynomial(g)?;
        }
        check_polynomial(&self.f)?;
        check_polynomial(&self.f_prime)?;
        let a = pull_back(&self.f, &self.theta, &self.v)?;
        let b = pull_back(&self.f_prime, &self.theta_prime, &self.v)?;
        Ok(&a - &b)
    }
}

/// Membership of `f∘θ − f′∘θ′` in `I²` with cofactors of degree ≤ D.
pub fn glue_check(g: &GlueDatum) -> Result<GlueOutcome, DcritError> {
    let diff = g.difference()?;
    let degree = diff.total_degree();
    let bound = g.bound.unwrap_or(degree + 2);
    if bound < degree {
        return Err(DcritError::BoundTooSmall { bound, degree });
    }
    let ideal: Vec<AlgebraElement> =
        g.ideal.iter().map(|e| e.embed(&g.v)).collect::<Result<_, _>>()?;
    let mut products = Vec::new();
    for a in 0..ideal.len() {
        for b in a..ideal.len() {
            products.push(((a, b), &ideal[a] * &ideal[b]));
        }
    }
    let cofactor_basis = monomials_up_to(g.v.len(), bound);
    let mut columns: Vec<AlgebraElement> = Vec::new();
    for (_, p) in &products {
        for m in &cofactor_basis {
            let mono = AlgebraElement::from_monomial(&g.v, m.clone(), Q::from_integer(1.into()));
            columns.push(&mono * p);
        }
    }
    let mut rows: BTreeMap<Monomial, usize> = BTreeMap::new();
    for e in columns.iter().chain(std::iter::once(&diff)) {
        for m in e.terms().keys() {
            let n = rows.len();
            rows.entry(m.clone()).or_insert(n);
        }
    }
    let mut matrix = Matrix::zeros(rows.len(), columns.len());
    for (j, c) in columns.iter().enumerate() {
        for (m, v) in c.terms() {
            matrix.set(rows[m], j, v.clone());
        }
    }
    let mut rhs = vec![Q::zero(); rows.len()];
    for (m, v) in diff.terms() {
        rhs[rows[m]] = v.clone();
    }
    let Some(solution) = matrix.solve(&rhs) else {
        return Ok(GlueOutcome { member: false, bound, difference: diff, certificate: Vec::new() });
    };
    let per = cofactor_basis.len();
    let certificate = products
        .iter()
        .enumerate()
        .map(|(k, (ab, _))| {
            let mut c = AlgebraElement::zero(&g.v);
            for (m, u) in cofactor_basis.iter().zip(&solution[k * per..(k + 1) * per]) {
                c = &c + &AlgebraElement::from_monomial(&g.v, m.clone(), u.clone());
            }
            (*ab, c)
        })
        .collect();
    Ok(GlueOutcome { member: true, bound, difference: diff, certificate })
}

impl GlueOutcome {
    /// Recomputes `Σ c_ab g_a g_b` and compares with the difference.
    pub fn verify(&self, ideal: &[AlgebraElement]) -> bool {
        if !self.member {
            return false;
        }
        let mut acc = AlgebraElement::zero(self.difference.set());
        for ((a, b), c) in &self.certificate {
            let (Ok(ga), Ok(gb)) = (ideal[*a].embed(self.difference.set()), ideal[*b].embed(self.difference.set()))
            else {
                return false;
            };
            acc = &acc + &(&(c * &ga) * &gb);
        }
        acc == self.difference
    }
}
