//! Text forms of polynomials and tensors.
//!
//! Canonical printing writes basis words as `e{k}` products with
//! shortest round-trip floats, so [`super::parse::parse`] reads it back to
//! the same canonical form. Symbolic printing reproduces coefficient names
//! and is only available when every coefficient is named.

use std::fmt::Write;

use num_complex::Complex64;

use crate::ncpoly::{CanonicalPoly, Coefficient, Monomial, NCPoly, Word};
use crate::tensor::{CanonicalTensor, TensorElem};

/// `(re+imi)`, parseable by the expression grammar.
pub fn complex(c: Complex64) -> String {
    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
    format!("({:?}{sign}{:?}i)", c.re, c.im.abs())
}

fn word(w: &Word) -> String {
    let mut s = String::new();
    for (i, k) in w.0.iter().enumerate() {
        if i > 0 {
            s.push_str("*X*");
        }
        write!(s, "e{k}").unwrap();
    }
    s
}

pub fn canonical_poly(canon: &CanonicalPoly) -> String {
    if canon.is_empty() {
        return "0".into();
    }
    canon
        .iter()
        .map(|(w, &c)| format!("{}*{}", complex(c), word(w)))
        .collect::<Vec<_>>()
        .join(" + ")
}

pub fn canonical_tensor(canon: &CanonicalTensor) -> String {
    if canon.is_empty() {
        return "0".into();
    }
    canon
        .iter()
        .map(|((l, r), &c)| format!("{}*{} ⊗ {}", complex(c), word(l), word(r)))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn label(c: &Coefficient) -> Option<String> {
    Some(
        c.label()?
            .iter()
            .map(|f| if f.adjoint { format!("{}'", f.name) } else { f.name.clone() })
            .collect::<Vec<_>>()
            .join("*"),
    )
}

fn monomial(m: &Monomial) -> Option<String> {
    let mut parts = Vec::new();
    for (i, c) in m.coeffs().iter().enumerate() {
        if i > 0 {
            parts.push("X".to_string());
        }
        let l = label(c)?;
        if !l.is_empty() {
            parts.push(l);
        }
    }
    Some(if parts.is_empty() { "1".into() } else { parts.join("*") })
}

fn weighted(w: Complex64, body: String) -> String {
    if w == Complex64::new(1.0, 0.0) {
        body
    } else {
        format!("{}*{body}", complex(w))
    }
}

/// Stored terms with their coefficient names, e.g. `b0*X*b1 + X*X`.
pub fn symbolic_poly(p: &NCPoly) -> Option<String> {
    if p.terms().is_empty() {
        return Some("0".into());
    }
    let terms = p
        .terms()
        .iter()
        .map(|(w, m)| Some(weighted(*w, monomial(m)?)))
        .collect::<Option<Vec<_>>>()?;
    Some(terms.join(" + "))
}

/// Stored terms with their coefficient names, e.g. `b0 ⊗ b1*X*b2`.
pub fn symbolic_tensor(t: &TensorElem) -> Option<String> {
    if t.terms().is_empty() {
        return Some("0".into());
    }
    let terms = t
        .terms()
        .iter()
        .map(|(w, l, r)| Some(weighted(*w, format!("{} ⊗ {}", monomial(l)?, monomial(r)?))))
        .collect::<Option<Vec<_>>>()?;
    Some(terms.join(" + "))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::super::parse::{parse, Coefficients};
    use super::*;
    use crate::coeff_algebra::{build_subalgebra, BuildOptions, SubalgebraSpec};
    use crate::derivation::fdq;

    fn ctx() -> Coefficients {
        let spec = SubalgebraSpec::Blocks { sizes: Some(vec![2, 1]) };
        Coefficients::with_auto(Arc::new(build_subalgebra(&spec, 3, BuildOptions::default()).unwrap()), 0)
    }

    #[test]
    fn complex_format_round_trips() {
        assert_eq!(complex(Complex64::new(1.5, -2.0)), "(1.5-2.0i)");
        assert_eq!(complex(Complex64::new(-0.1, 3e-20)), "(-0.1+3e-20i)");
    }

    #[test]
    fn fdq_display() {
        let p = parse("b0*X*b1*X*b2", &ctx()).unwrap();
        assert_eq!(symbolic_tensor(&fdq(&p)).unwrap(), "b0 ⊗ b1*X*b2 + b0*X*b1 ⊗ b2");
    }

    #[test]
    fn symbolic_keeps_adjoints_and_omits_units() {
        let p = parse("(b0*X)' + 2*X^2", &ctx()).unwrap();
        assert_eq!(symbolic_poly(&p).unwrap(), "X*b0' + (2.0+0.0i)*X*X");
        let dp = fdq(&parse("X", &ctx()).unwrap());
        assert_eq!(symbolic_tensor(&dp).unwrap(), "1 ⊗ 1");
    }

    #[test]
    fn canonical_print_parses_back() {
        let c = ctx();
        let p = parse("b0*X*b1 - (0.25+1i)*X^2*b2' + b3", &c).unwrap();
        let text = canonical_poly(p.canonical().unwrap());
        let q = parse(&text, &c).unwrap();
        assert!(p.canonical_eq(&q, 1e-12).unwrap(), "{text}");
        assert_eq!(canonical_poly(&CanonicalPoly::default()), "0");
    }
}
