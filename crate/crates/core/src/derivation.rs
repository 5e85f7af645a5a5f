//! The free difference quotient `d_{X:B}`.
//!
//! On a monomial `b_0 X b_1 ... X b_n` it returns the sum of its `n` splits
//! `b_0 X ... b_{i-1} (x) b_i X ... X b_n`; degree-zero monomials map to zero.
//! It acts on the stored representation so that norm bounds on the result
//! are taken over the terms the caller wrote.

use crate::ncpoly::NCPoly;
use crate::tensor::TensorElem;

pub fn fdq(p: &NCPoly) -> TensorElem {
    let mut terms = Vec::new();
    for (w, m) in p.terms() {
        for i in 1..=m.degree() {
            let (l, r) = m.split(i);
            terms.push((*w, l, r));
        }
    }
    TensorElem::from_terms_unchecked(p.algebra().clone(), terms)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_complex::Complex64;

    use super::*;
    use crate::coeff_algebra::{build_subalgebra, BuildOptions, CoeffAlgebra, Mat, SubalgebraSpec};
    use crate::ncpoly::Coefficient;

    fn alg() -> Arc<CoeffAlgebra> {
        Arc::new(build_subalgebra(&SubalgebraSpec::Blocks { sizes: Some(vec![2, 1]) }, 3, BuildOptions::default()).unwrap())
    }

    fn named(a: &Arc<CoeffAlgebra>, name: &str, seed: f64) -> NCPoly {
        let mut m = Mat::zeros(3, 3);
        m[(0, 0)] = Complex64::new(seed, 0.0);
        m[(0, 1)] = Complex64::new(1.0, seed);
        m[(1, 0)] = Complex64::new(-0.5, 0.0);
        m[(2, 2)] = Complex64::new(2.0 - seed, 0.0);
        NCPoly::constant(a.clone(), Coefficient::named(name, m)).unwrap()
    }

    #[test]
    fn derivative_of_x_is_unit_tensor() {
        let a = alg();
        let got = fdq(&NCPoly::x(a.clone()));
        assert!(got.canonical_eq(&TensorElem::unit(a), 1e-12).unwrap());
    }

    #[test]
    fn constants_are_killed() {
        let a = alg();
        let got = fdq(&named(&a, "b", 0.3));
        assert!(got.terms().is_empty());
    }

    #[test]
    fn two_letter_word_splits_twice() {
        let a = alg();
        let (b0, b1, b2) = (named(&a, "b0", 0.1), named(&a, "b1", 0.7), named(&a, "b2", -1.2));
        let x = NCPoly::x(a.clone());
        let p = b0.mul(&x).unwrap().mul(&b1).unwrap().mul(&x).unwrap().mul(&b2).unwrap();
        let want = TensorElem::pure(&b0, &b1.mul(&x).unwrap().mul(&b2).unwrap())
            .unwrap()
            .add(&TensorElem::pure(&b0.mul(&x).unwrap().mul(&b1).unwrap(), &b2).unwrap())
            .unwrap();
        let got = fdq(&p);
        assert_eq!(got.terms().len(), 2);
        assert!(got.canonical_eq(&want, 1e-12).unwrap());
    }

    #[test]
    fn square_splits_symmetrically() {
        let a = alg();
        let x = NCPoly::x(a.clone());
        let one = NCPoly::one(a.clone());
        let want = TensorElem::pure(&one, &x).unwrap().add(&TensorElem::pure(&x, &one).unwrap()).unwrap();
        assert!(fdq(&x.pow(2)).canonical_eq(&want, 1e-12).unwrap());
    }
}
