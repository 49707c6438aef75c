//! Exact computer algebra for the local models of shifted symplectic derived
//! geometry and for the motivic vanishing-cycle calculus.

pub mod cdga;
pub mod cli;
pub mod darboux;
pub mod dcrit;
pub mod expr;
pub mod graded;
pub mod linalg;
pub mod model;
pub mod motive;
pub mod vanishing;
