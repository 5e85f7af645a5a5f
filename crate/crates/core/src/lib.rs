//! Operator-valued non-commutative polynomial calculus over finite matrix
//! models, with executable checks of the free Poincaré inequality with
//! operator coefficients.
//!
//! The symbolic layer ([`ncpoly`], [`tensor`], [`derivation`]) works with
//! formal `B`-valued polynomials in one indeterminate; matrix models from
//! [`coeff_algebra`] are only used to evaluate them.

pub mod cli;
pub mod coeff_algebra;
pub mod derivation;
pub mod error;
pub mod models_rng;
pub mod ncpoly;
pub mod tensor;
pub mod verifier;

pub use coeff_algebra::{build_subalgebra, BuildOptions, CoeffAlgebra, Mat, MatrixModel, SubalgebraSpec};
pub use derivation::fdq;
pub use error::{Error, Result};
pub use ncpoly::{CanonicalPoly, Coefficient, Monomial, NCPoly, Representation, Word};
pub use tensor::TensorElem;
