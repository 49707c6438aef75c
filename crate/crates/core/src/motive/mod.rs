//! Monodromic motivic rings as a term-rewriting engine.
//!
//! Elements are finite sums of ⊙-monomials in opaque atoms with coefficients in
//! `ℤ[L^(±1/2)][(L^k − 1)^{-1}]`. `L^(1/2)` is identified with `1 − [μ₂]`, so
//! `[μ₂]` never appears as an atom and the rules for `μ₂` hold by construction.

pub mod coeff;
pub mod element;
pub mod syntax;
pub mod universe;

pub use coeff::{Coeff, CoeffError, LPoly};
pub use element::{Atom, HCoeff, Mono, MotiveElement, POINT};
pub use syntax::{evaluate, Evaluator};
pub use universe::{
    fold_bundles, gl_class, gl_coeff, GroupKind, MorphismDecl, MorphismKind, OdotRule, Square, StackContext,
    Stratum, StratumData, Universe,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MotiveError {
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error("elements live over different bases: {left} and {right}")]
    BaseMismatch { left: String, right: String },
    #[error("`{name}` expects an element over {expected}, found one over {found}")]
    MorphismMismatch { name: String, expected: String, found: String },
    #[error("undeclared morphism `{0}`")]
    UndeclaredMorphism(String),
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("`{0}` is already declared")]
    Duplicate(String),
    #[error("{0}")]
    Declaration(String),
    #[error("bad composite: {0}")]
    Composition(String),
    #[error("pullback along stack morphism `{0}` needs a stratification of its source")]
    MissingStratification(String),
    #[error("context has {expected} strata but {found} were supplied")]
    MismatchedStrata { expected: usize, found: usize },
    #[error("{0} is not invertible")]
    NotInvertible(String),
    #[error("GL(n) needs n ≥ 1")]
    NonPositiveGl,
    #[error("quotient rules did not terminate")]
    RuleLoop,
    #[error("the fibre product is not defined on the quotient ring (Υ present)")]
    DotOnQuotient,
    #[error("half-integer power of L in a `.` operand; use `*` or write it via mu(2)")]
    HalfPowerInDot,
    #[error("no Euler number declared for {0}")]
    UndeclaredEuler(String),
    #[error("{message} at column {column}")]
    Syntax { message: String, column: usize },
}
