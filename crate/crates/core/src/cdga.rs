//! Standard-form cdgas: free graded algebras built tier by tier over a
//! polynomial base, with pointwise cotangent-fibre cohomology.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::graded::{AlgebraElement, Derivation, GeneratorSet, GradedError, Q};
use crate::linalg::Matrix;

/// Values for the base coordinates.
pub type Point = BTreeMap<String, Q>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CdgaError {
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error("image of `{gen}` has degree {found}, expected {expected}")]
    DegreeMismatch { gen: String, found: i32, expected: i32 },
    #[error("image of base coordinate `{0}` must be zero")]
    BaseImage(String),
    #[error("image of `{gen}` refers to `{target}` from tier {target_tier} ≥ {tier}")]
    ForwardReference { gen: String, target: String, tier: i32, target_tier: i32 },
    #[error("d²{gen} = {residual} ≠ 0")]
    NonZeroSquare { gen: String, residual: String },
    #[error("invalid point: {0}")]
    InvalidPoint(String),
}

#[derive(Clone, Debug)]
pub struct StandardFormCdga {
    set: Arc<GeneratorSet>,
    d: Derivation,
}

/// The complex `Ω¹_A ⊗ κ(p)`: per degree a basis of form symbols, and the
/// matrix from each degree `e` to `e + 1` (columns indexed by degree `e`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FibreComplex {
    pub basis: BTreeMap<i32, Vec<String>>,
    pub differentials: BTreeMap<i32, Matrix>,
}

impl StandardFormCdga {
    /// Validates degrees, tier ordering and `d² = 0` on every generator.
    pub fn build(
        set: &Arc<GeneratorSet>,
        images: BTreeMap<usize, AlgebraElement>,
    ) -> Result<Self, CdgaError> {
        for (&g, img) in &images {
            let gen = set.get(g);
            if img.is_zero() {
                continue;
            }
            if gen.degree == 0 {
                return Err(CdgaError::BaseImage(gen.name.clone()));
            }
            let expected = gen.degree + 1;
            for m in img.terms().keys() {
                let found = m.degree(set);
                if found != expected {
                    return Err(CdgaError::DegreeMismatch { gen: gen.name.clone(), found, expected });
                }
                if m.form_weight() > 0 {
                    return Err(CdgaError::DegreeMismatch { gen: gen.name.clone(), found, expected });
                }
            }
            let tier = -gen.degree;
            for (h, other) in set.gens().iter().enumerate() {
                if -other.degree >= tier && img.mentions(h) {
                    return Err(CdgaError::ForwardReference {
                        gen: gen.name.clone(),
                        target: other.name.clone(),
                        tier,
                        target_tier: -other.degree,
                    });
                }
            }
        }
        let d = Derivation::new(set, 1, images)?;
        for g in 0..set.len() {
            let dd = d.apply(&d.image(g))?;
            if !dd.is_zero() {
                return Err(CdgaError::NonZeroSquare {
                    gen: set.get(g).name.clone(),
                    residual: dd.to_string(),
                });
            }
        }
        Ok(StandardFormCdga { set: set.clone(), d })
    }

    pub fn set(&self) -> &Arc<GeneratorSet> {
        &self.set
    }

    pub fn d(&self) -> &Derivation {
        &self.d
    }

    pub fn apply_d(&self, a: &AlgebraElement) -> AlgebraElement {
        self.d.apply(a).expect("element over this algebra")
    }

    pub fn base_names(&self) -> Vec<String> {
        self.set
            .gens()
            .iter()
            .filter(|g| g.degree == 0)
            .map(|g| g.name.clone())
            .collect()
    }

    /// Number of generators per tier, starting with the base.
    pub fn tier_counts(&self) -> Vec<usize> {
        let depth = self.set.gens().iter().map(|g| -g.degree).max().unwrap_or(0);
        let mut out = vec![0; depth as usize + 1];
        for g in self.set.gens() {
            out[(-g.degree) as usize] += 1;
        }
        out
    }

    /// Generators of `H⁰ = A⁰ / (tier-1 images)`.
    pub fn h0_presentation(&self) -> Vec<AlgebraElement> {
        (0..self.set.len())
            .filter(|&g| self.set.get(g).degree == -1)
            .map(|g| self.d.image(g))
            .collect()
    }

    pub fn check_point(&self, p: &Point) -> Result<(), CdgaError> {
        for name in self.base_names() {
            if !p.contains_key(&name) {
                return Err(CdgaError::InvalidPoint(format!("no value for `{name}`")));
            }
        }
        for key in p.keys() {
            match self.set.lookup(key) {
                Some(g) if self.set.get(g).degree == 0 => {}
                _ => return Err(CdgaError::InvalidPoint(format!("`{key}` is not a base coordinate"))),
            }
        }
        for img in self.h0_presentation() {
            let v = img.evaluate(p)?;
            if !v.is_zero() {
                return Err(CdgaError::InvalidPoint(format!("{img} does not vanish at the point")));
            }
        }
        Ok(())
    }

    pub fn fibre_complex(&self, p: &Point) -> Result<FibreComplex, CdgaError> {
        self.check_point(p)?;
        Ok(self.fibre_complex_unchecked(p))
    }

    fn fibre_complex_unchecked(&self, p: &Point) -> FibreComplex {
        let mut by_degree: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for (g, gen) in self.set.gens().iter().enumerate() {
            by_degree.entry(gen.degree).or_default().push(g);
        }
        let basis = by_degree
            .iter()
            .map(|(&e, gs)| (e, gs.iter().map(|&g| self.set.get(g).name.clone()).collect()))
            .collect();
        let mut differentials = BTreeMap::new();
        for (&e, cols) in &by_degree {
            let Some(rows) = by_degree.get(&(e + 1)) else { continue };
            let mut m = Matrix::zeros(rows.len(), cols.len());
            for (j, &g) in cols.iter().enumerate() {
                let img = self.d.image(g);
                for (i, &h) in rows.iter().enumerate() {
                    let v = img
                        .partial(h)
                        .evaluate(p)
                        .expect("point covers the base");
                    m.set(i, j, v);
                }
            }
            differentials.insert(e, m);
        }
        FibreComplex { basis, differentials }
    }

    pub fn cohomology_dims(&self, p: &Point) -> Result<BTreeMap<i32, usize>, CdgaError> {
        Ok(self.fibre_complex(p)?.cohomology_dims())
    }

    pub fn is_minimal_at(&self, p: &Point) -> Result<bool, CdgaError> {
        let fc = self.fibre_complex(p)?;
        Ok(fc.differentials.values().all(Matrix::is_zero))
    }

    /// `d` extended to forms, anticommuting with `dR`.
    pub fn differential_on_forms(&self, w: &AlgebraElement) -> AlgebraElement {
        self.apply_d(w)
    }
}

impl FibreComplex {
    pub fn cohomology_dims(&self) -> BTreeMap<i32, usize> {
        let mut out = BTreeMap::new();
        for (&e, names) in &self.basis {
            let out_rank = self.differentials.get(&e).map_or(0, Matrix::rank);
            let in_rank = self.differentials.get(&(e - 1)).map_or(0, Matrix::rank);
            out.insert(e, names.len() - out_rank - in_rank);
        }
        out
    }
}
