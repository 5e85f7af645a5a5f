//! `B`-valued non-commutative polynomials in one indeterminate.
//!
//! A polynomial is stored as a weighted list of monomials
//! `b_0 X b_1 X ... X b_n` exactly as it was built, so norm bounds can be
//! taken over the representation the caller wrote. The canonical form
//! expands every coefficient in the orthonormal basis of `B` and collects
//! weights on basis words `e_{k_0} X e_{k_1} ... X e_{k_n}`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeff_algebra::{identity, l2_norm, op_norm, CoeffAlgebra, Mat, MatrixModel};
use crate::error::{Error, Result};

/// Weights below this magnitude are dropped from canonical forms.
pub const DROP_THRESHOLD: f64 = 1e-12;

pub const DEFAULT_DEGREE_CAP: usize = 12;

/// Maximum number of words a single canonical expansion may produce.
pub const DEFAULT_CANONICAL_CAP: usize = 1 << 16;

// Basis coordinates smaller than this (relative to the coefficient's L2
// norm) are floating-point dust and are skipped during expansion.
const COORD_EPS: f64 = 1e-14;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub degree_cap: usize,
    pub canonical_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            degree_cap: DEFAULT_DEGREE_CAP,
            canonical_cap: DEFAULT_CANONICAL_CAP,
        }
    }
}

/// Which representation of an element a norm bound was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Stored,
    Canonical,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::Stored => "stored",
            Representation::Canonical => "canonical",
            Representation::NotApplicable => "n/a",
        })
    }
}

/// One named factor of a coefficient label, possibly adjointed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factor {
    pub name: String,
    pub adjoint: bool,
}

/// An element of `B` together with an optional symbolic name.
///
/// The label is a product of named factors (empty for the unit) and is
/// carried only for display; `None` marks an anonymous matrix.
#[derive(Debug, Clone)]
pub struct Coefficient {
    matrix: Mat,
    label: Option<Vec<Factor>>,
}

impl Coefficient {
    pub fn unit(n: usize) -> Self {
        Self {
            matrix: identity(n),
            label: Some(Vec::new()),
        }
    }

    pub fn named(name: impl Into<String>, matrix: Mat) -> Self {
        Self {
            matrix,
            label: Some(vec![Factor {
                name: name.into(),
                adjoint: false,
            }]),
        }
    }

    pub fn anonymous(matrix: Mat) -> Self {
        Self { matrix, label: None }
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn label(&self) -> Option<&[Factor]> {
        self.label.as_deref()
    }

    pub fn is_unit_label(&self) -> bool {
        matches!(&self.label, Some(l) if l.is_empty())
    }

    pub fn mul(&self, other: &Coefficient) -> Coefficient {
        let label = match (&self.label, &other.label) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
            _ => None,
        };
        Coefficient {
            matrix: &self.matrix * &other.matrix,
            label,
        }
    }

    pub fn adjoint(&self) -> Coefficient {
        Coefficient {
            matrix: self.matrix.adjoint(),
            label: self.label.as_ref().map(|l| {
                l.iter()
                    .rev()
                    .map(|f| Factor {
                        name: f.name.clone(),
                        adjoint: !f.adjoint,
                    })
                    .collect()
            }),
        }
    }
}

/// `b_0 X b_1 X ... X b_n`, stored as the list `[b_0, ..., b_n]`.
#[derive(Debug, Clone)]
pub struct Monomial {
    coeffs: Vec<Coefficient>,
}

impl Monomial {
    /// Builds a monomial, checking every coefficient lies in `alg`.
    pub fn new(alg: &CoeffAlgebra, coeffs: Vec<Coefficient>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Config("a monomial needs at least one coefficient".into()));
        }
        for c in &coeffs {
            alg.check_member(&c.matrix)?;
        }
        Ok(Self { coeffs })
    }

    pub(crate) fn from_coeffs_unchecked(coeffs: Vec<Coefficient>) -> Self {
        debug_assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn unit(n: usize) -> Self {
        Self {
            coeffs: vec![Coefficient::unit(n)],
        }
    }

    /// `1 X 1`.
    pub fn x(n: usize) -> Self {
        Self {
            coeffs: vec![Coefficient::unit(n), Coefficient::unit(n)],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Coefficient] {
        &self.coeffs
    }

    /// Concatenation; the boundary coefficients merge into `b_n c_0`.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + other.coeffs.len() - 1);
        coeffs.extend_from_slice(&self.coeffs[..self.coeffs.len() - 1]);
        coeffs.push(self.coeffs[self.coeffs.len() - 1].mul(&other.coeffs[0]));
        coeffs.extend_from_slice(&other.coeffs[1..]);
        Monomial { coeffs }
    }

    pub fn adjoint(&self) -> Monomial {
        Monomial {
            coeffs: self.coeffs.iter().rev().map(Coefficient::adjoint).collect(),
        }
    }

    /// The split at the `i`-th letter `X` (1-based): `(b_0 X ... b_{i-1}, b_i X ... b_n)`.
    pub fn split(&self, i: usize) -> (Monomial, Monomial) {
        assert!(i >= 1 && i <= self.degree(), "split index out of range");
        (
            Monomial {
                coeffs: self.coeffs[..i].to_vec(),
            },
            Monomial {
                coeffs: self.coeffs[i..].to_vec(),
            },
        )
    }

    pub fn evaluate(&self, x: &Mat) -> Mat {
        let mut acc = self.coeffs[0].matrix.clone();
        for c in &self.coeffs[1..] {
            acc = &acc * x;
            acc = &acc * &c.matrix;
        }
        acc
    }

    /// `prod_i |b_i|_op`.
    pub fn coeff_norm_product(&self) -> f64 {
        self.coeffs.iter().map(|c| op_norm(&c.matrix)).product()
    }

    /// Sparse basis expansion of this monomial as `(word, weight)` pairs.
    pub(crate) fn expand(&self, alg: &CoeffAlgebra, limits: &Limits) -> Result<Vec<(Word, Complex64)>> {
        if self.degree() > limits.degree_cap {
            return Err(Error::DegreeCap {
                degree: self.degree(),
                cap: limits.degree_cap,
            });
        }
        let coords: Vec<Vec<(u32, Complex64)>> = self.coeffs.iter().map(|c| sparse_coords(alg, &c.matrix)).collect();
        let size: u128 = coords.iter().map(|c| c.len() as u128).product();
        if size > limits.canonical_cap as u128 {
            return Err(Error::CapExceeded {
                what: "canonical expansion",
                size,
                cap: limits.canonical_cap,
            });
        }
        let mut out = Vec::with_capacity(size as usize);
        if size == 0 {
            return Ok(out);
        }
        // Odometer over the cartesian product of coordinate lists.
        let mut idx = vec![0usize; coords.len()];
        loop {
            let mut w = ONE;
            let mut word = Vec::with_capacity(coords.len());
            for (slot, &i) in idx.iter().enumerate() {
                let (k, c) = coords[slot][i];
                w *= c;
                word.push(k);
            }
            out.push((Word(word), w));
            let mut slot = coords.len();
            loop {
                if slot == 0 {
                    return Ok(out);
                }
                slot -= 1;
                idx[slot] += 1;
                if idx[slot] < coords[slot].len() {
                    break;
                }
                idx[slot] = 0;
            }
        }
    }

    /// The monomial `e_{k_0} X ... X e_{k_n}` for a basis word.
    pub fn from_word(alg: &CoeffAlgebra, word: &Word) -> Monomial {
        Monomial {
            coeffs: word
                .0
                .iter()
                .map(|&k| Coefficient::named(format!("e{k}"), alg.basis()[k as usize].clone()))
                .collect(),
        }
    }
}

fn sparse_coords(alg: &CoeffAlgebra, a: &Mat) -> Vec<(u32, Complex64)> {
    let floor = COORD_EPS * l2_norm(a).max(1.0);
    alg.coords(a)
        .into_iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > floor)
        .map(|(k, c)| (k as u32, c))
        .collect()
}

/// A word `(k_0, ..., k_n)` of basis indices; degree `n`. Words order by
/// degree first, then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<u32>);

impl Word {
    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical form of a polynomial: basis words to weights, with no weight
/// at or below [`DROP_THRESHOLD`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CanonicalPoly {
    entries: BTreeMap<Word, Complex64>,
}

impl CanonicalPoly {
    pub(crate) fn from_accumulated(mut entries: BTreeMap<Word, Complex64>) -> Self {
        entries.retain(|_, w| w.norm() > DROP_THRESHOLD);
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &Word) -> Option<Complex64> {
        self.entries.get(word).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &Complex64)> {
        self.entries.iter()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.entries.keys().map(Word::degree).max()
    }

    /// True when every surviving word has degree zero (the element is in `B`).
    pub fn is_degree_zero_only(&self) -> bool {
        self.entries.keys().all(|w| w.degree() == 0)
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &CanonicalPoly) -> f64 {
        max_abs_diff(&self.entries, &other.entries)
    }

    pub fn approx_eq(&self, other: &CanonicalPoly, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }
}

pub(crate) fn max_abs_diff<K: Ord>(a: &BTreeMap<K, Complex64>, b: &BTreeMap<K, Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, x) in a {
        worst = worst.max((x - b.get(k).copied().unwrap_or(ZERO)).norm());
    }
    for (k, y) in b {
        if !a.contains_key(k) {
            worst = worst.max(y.norm());
        }
    }
    worst
}

/// A `B`-valued non-commutative polynomial.
#[derive(Debug, Clone)]
pub struct NCPoly {
    algebra: Arc<CoeffAlgebra>,
    terms: Vec<(Complex64, Monomial)>,
    canonical: OnceLock<Result<CanonicalPoly>>,
}

pub(crate) fn same_algebra(a: &Arc<CoeffAlgebra>, b: &Arc<CoeffAlgebra>) -> Result<()> {
    if Arc::ptr_eq(a, b) {
        return Ok(());
    }
    let same = a.ambient_dim() == b.ambient_dim()
        && a.dim() == b.dim()
        && a.basis().iter().zip(b.basis()).all(|(x, y)| x == y);
    if same {
        Ok(())
    } else {
        Err(Error::MixedAlgebras)
    }
}

impl NCPoly {
    pub(crate) fn from_terms_unchecked(algebra: Arc<CoeffAlgebra>, terms: Vec<(Complex64, Monomial)>) -> Self {
        Self {
            algebra,
            terms,
            canonical: OnceLock::new(),
        }
    }

    /// Builds a polynomial, checking every coefficient against `algebra`.
    pub fn from_terms(algebra: Arc<CoeffAlgebra>, terms: Vec<(Complex64, Monomial)>) -> Result<Self> {
        for (_, m) in &terms {
            for c in m.coeffs() {
                algebra.check_member(c.matrix())?;
            }
        }
        Ok(Self::from_terms_unchecked(algebra, terms))
    }

    pub fn zero(algebra: Arc<CoeffAlgebra>) -> Self {
        Self::from_terms_unchecked(algebra, Vec::new())
    }

    pub fn one(algebra: Arc<CoeffAlgebra>) -> Self {
        let n = algebra.ambient_dim();
        Self::from_terms_unchecked(algebra, vec![(ONE, Monomial::unit(n))])
    }

    pub fn scalar(algebra: Arc<CoeffAlgebra>, c: Complex64) -> Self {
        Self::one(algebra).scale(c)
    }

    /// The indeterminate `X` (equivalently `t`).
    pub fn x(algebra: Arc<CoeffAlgebra>) -> Self {
        let n = algebra.ambient_dim();
        Self::from_terms_unchecked(algebra, vec![(ONE, Monomial::x(n))])
    }

    /// The degree-zero polynomial `b`.
    pub fn constant(algebra: Arc<CoeffAlgebra>, b: Coefficient) -> Result<Self> {
        algebra.check_member(b.matrix())?;
        Ok(Self::from_terms_unchecked(algebra, vec![(ONE, Monomial { coeffs: vec![b] })]))
    }

    pub fn monomial(algebra: Arc<CoeffAlgebra>, m: Monomial) -> Result<Self> {
        Self::from_terms(algebra, vec![(ONE, m)])
    }

    /// Rebuilds a polynomial whose stored terms are the basis words.
    pub fn from_canonical(algebra: Arc<CoeffAlgebra>, canon: &CanonicalPoly) -> Self {
        let terms = canon
            .iter()
            .map(|(w, &c)| (c, Monomial::from_word(&algebra, w)))
            .collect();
        Self::from_terms_unchecked(algebra, terms)
    }

    pub fn algebra(&self) -> &Arc<CoeffAlgebra> {
        &self.algebra
    }

    pub fn terms(&self) -> &[(Complex64, Monomial)] {
        &self.terms
    }

    /// Largest degree among stored terms (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(_, m)| m.degree()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &NCPoly) -> Result<NCPoly> {
        same_algebra(&self.algebra, &other.algebra)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self::from_terms_unchecked(self.algebra.clone(), terms))
    }

    pub fn sub(&self, other: &NCPoly) -> Result<NCPoly> {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, c: Complex64) -> NCPoly {
        let terms = self.terms.iter().map(|(w, m)| (w * c, m.clone())).collect();
        Self::from_terms_unchecked(self.algebra.clone(), terms)
    }

    pub fn neg(&self) -> NCPoly {
        self.scale(-ONE)
    }

    pub fn mul(&self, other: &NCPoly) -> Result<NCPoly> {
        same_algebra(&self.algebra, &other.algebra)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (w1, m1) in &self.terms {
            for (w2, m2) in &other.terms {
                terms.push((w1 * w2, m1.mul(m2)));
            }
        }
        Ok(Self::from_terms_unchecked(self.algebra.clone(), terms))
    }

    pub fn pow(&self, k: u32) -> NCPoly {
        let mut acc = NCPoly::one(self.algebra.clone());
        for _ in 0..k {
            acc = acc.mul(self).expect("same algebra");
        }
        acc
    }

    /// Word reversal with every coefficient and weight adjointed.
    pub fn adjoint(&self) -> NCPoly {
        let terms = self.terms.iter().map(|(w, m)| (w.conj(), m.adjoint())).collect();
        Self::from_terms_unchecked(self.algebra.clone(), terms)
    }

    /// `p(X)` in the model.
    pub fn evaluate(&self, model: &MatrixModel) -> Result<Mat> {
        same_algebra(&self.algebra, model.algebra())?;
        Ok(self.evaluate_at(model.x()))
    }

    pub(crate) fn evaluate_at(&self, x: &Mat) -> Mat {
        let n = self.algebra.ambient_dim();
        let mut acc = Mat::zeros(n, n);
        for (w, m) in &self.terms {
            acc += m.evaluate(x) * *w;
        }
        acc
    }

    /// Canonical form under the default limits (computed once).
    pub fn canonical(&self) -> Result<&CanonicalPoly> {
        self.canonical
            .get_or_init(|| self.canonical_with(&Limits::default()))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn canonical_with(&self, limits: &Limits) -> Result<CanonicalPoly> {
        let mut acc: BTreeMap<Word, Complex64> = BTreeMap::new();
        let mut total = 0usize;
        for (w, m) in &self.terms {
            let expanded = m.expand(&self.algebra, limits)?;
            total += expanded.len();
            if total > limits.canonical_cap {
                return Err(Error::CapExceeded {
                    what: "canonical expansion",
                    size: total as u128,
                    cap: limits.canonical_cap,
                });
            }
            for (word, c) in expanded {
                *acc.entry(word).or_insert(ZERO) += w * c;
            }
        }
        Ok(CanonicalPoly::from_accumulated(acc))
    }

    /// Equality of canonical forms up to `tol` entrywise.
    pub fn canonical_eq(&self, other: &NCPoly, tol: f64) -> Result<bool> {
        same_algebra(&self.algebra, &other.algebra)?;
        Ok(self.canonical()?.approx_eq(other.canonical()?, tol))
    }

    /// `sum |w| prod |b_i| R^deg` over the chosen representation: an upper
    /// bound on `|||p|||_R`.
    pub fn norm_r_upper(&self, radius: f64, repr: Representation) -> Result<f64> {
        if radius.is_nan() || radius <= 0.0 {
            return Err(Error::NonPositiveRadius(radius));
        }
        match repr {
            Representation::Canonical => {
                let canon = self.canonical()?;
                let basis_norms: Vec<f64> = self.algebra.basis().iter().map(op_norm).collect();
                Ok(canon
                    .iter()
                    .map(|(word, c)| {
                        let prod: f64 = word.0.iter().map(|&k| basis_norms[k as usize]).product();
                        c.norm() * prod * radius.powi(word.degree() as i32)
                    })
                    .sum())
            }
            _ => Ok(self
                .terms
                .iter()
                .map(|(w, m)| w.norm() * m.coeff_norm_product() * radius.powi(m.degree() as i32))
                .sum()),
        }
    }

    /// The smaller of the stored and canonical bounds; the canonical one is
    /// skipped when its expansion exceeds the caps.
    pub fn norm_r_upper_best(&self, radius: f64) -> Result<(f64, Representation)> {
        let stored = self.norm_r_upper(radius, Representation::Stored)?;
        match self.norm_r_upper(radius, Representation::Canonical) {
            Ok(c) if c < stored => Ok((c, Representation::Canonical)),
            Ok(_) | Err(Error::CapExceeded { .. }) | Err(Error::DegreeCap { .. }) => {
                Ok((stored, Representation::Stored))
            }
            Err(e) => Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff_algebra::{build_subalgebra, BuildOptions, SubalgebraSpec};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn alg(spec: SubalgebraSpec, n: usize) -> Arc<CoeffAlgebra> {
        Arc::new(build_subalgebra(&spec, n, BuildOptions::default()).unwrap())
    }

    fn diag(vals: &[f64]) -> Mat {
        Mat::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|&v| c(v))))
    }

    fn model(a: &Arc<CoeffAlgebra>, x: Mat) -> MatrixModel {
        MatrixModel::new(a.clone(), x).unwrap()
    }

    fn close(a: &Mat, b: &Mat) -> bool {
        op_norm(&(a - b)) < 1e-12
    }

    #[test]
    fn mul_merges_boundary_coefficients() {
        let a = alg(SubalgebraSpec::Diagonal, 2);
        let b0 = Coefficient::named("b0", diag(&[1.0, 2.0]));
        let c0 = Coefficient::named("c0", diag(&[3.0, 5.0]));
        let c1 = Coefficient::named("c1", diag(&[-1.0, 0.5]));
        let left = Monomial::new(&a, vec![b0.clone(), Coefficient::unit(2)]).unwrap();
        let right = Monomial::new(&a, vec![c0.clone(), c1.clone()]).unwrap();
        let prod = left.mul(&right);
        assert_eq!(prod.degree(), 2);
        assert!(close(prod.coeffs()[0].matrix(), b0.matrix()));
        assert!(close(prod.coeffs()[1].matrix(), c0.matrix()));
        assert!(close(prod.coeffs()[2].matrix(), c1.matrix()));
        assert_eq!(prod.coeffs()[1].label().unwrap()[0].name, "c0");
    }

    #[test]
    fn adjoint_reverses_word() {
        let a = alg(SubalgebraSpec::Blocks { sizes: Some(vec![2]) }, 2);
        let b0 = Mat::from_row_slice(2, 2, &[c(1.0), Complex64::new(0.0, 2.0), c(0.0), c(3.0)]);
        let b1 = Mat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(4.0), c(0.0)]);
        let m = Monomial::new(&a, vec![Coefficient::named("b0", b0.clone()), Coefficient::named("b1", b1.clone())])
            .unwrap();
        let adj = m.adjoint();
        assert!(close(adj.coeffs()[0].matrix(), &b1.adjoint()));
        assert!(close(adj.coeffs()[1].matrix(), &b0.adjoint()));
        let lab = adj.coeffs()[0].label().unwrap();
        assert_eq!(lab, &[Factor { name: "b1".into(), adjoint: true }]);
    }

    #[test]
    fn unit_law() {
        let a = alg(SubalgebraSpec::Diagonal, 3);
        let b = Coefficient::named("b", diag(&[1.0, -2.0, 0.5]));
        let p = NCPoly::constant(a.clone(), b).unwrap().mul(&NCPoly::x(a.clone())).unwrap();
        let p1 = p.mul(&NCPoly::one(a.clone())).unwrap();
        assert!(p.canonical_eq(&p1, 1e-12).unwrap());
    }

    #[test]
    fn membership_is_checked() {
        let a = alg(SubalgebraSpec::Diagonal, 2);
        let off = Mat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(
            NCPoly::constant(a, Coefficient::anonymous(off)),
            Err(Error::NotInSubalgebra { .. })
        ));
    }

    #[test]
    fn mixed_algebras_are_rejected() {
        let a = alg(SubalgebraSpec::Diagonal, 2);
        let b = alg(SubalgebraSpec::Scalars, 2);
        assert_eq!(NCPoly::x(a).add(&NCPoly::x(b)).unwrap_err(), Error::MixedAlgebras);
    }

    #[test]
    fn canonical_of_basis_word_is_itself() {
        let a = alg(SubalgebraSpec::Diagonal, 2);
        let m = Monomial::from_word(&a, &Word(vec![0, 1]));
        let p = NCPoly::monomial(a, m).unwrap();
        let canon = p.canonical().unwrap();
        assert_eq!(canon.len(), 1);
        assert!((canon.get(&Word(vec![0, 1])).unwrap() - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn canonical_expands_unit_slot() {
        // (e0 + e1) X: the trailing unit is I = (e0 + e1) / sqrt(2).
        let a = alg(SubalgebraSpec::Diagonal, 2);
        let e0 = NCPoly::constant(a.clone(), Coefficient::named("e0", a.basis()[0].clone())).unwrap();
        let e1 = NCPoly::constant(a.clone(), Coefficient::named("e1", a.basis()[1].clone())).unwrap();
        let p = e0.add(&e1).unwrap().mul(&NCPoly::x(a.clone())).unwrap();
        let canon = p.canonical().unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert_eq!(canon.len(), 4);
        for (word, w) in canon.iter() {
            assert_eq!(word.degree(), 1);
            assert!((w - c(h)).norm() < 1e-14);
        }
    }

    #[test]
    fn cancellation_gives_empty_map() {
        let a = alg(SubalgebraSpec::Blocks { sizes: Some(vec![2, 1]) }, 3);
        let p = NCPoly::x(a.clone()).pow(3).add(&NCPoly::x(a.clone())).unwrap();
        let z = p.sub(&p).unwrap();
        assert!(z.canonical().unwrap().is_empty());
    }

    #[test]
    fn canonical_cap_is_an_error() {
        let a = alg(SubalgebraSpec::Diagonal, 4);
        let p = NCPoly::x(a).pow(9);
        let limits = Limits { degree_cap: 12, canonical_cap: 1000 };
        assert!(matches!(p.canonical_with(&limits), Err(Error::CapExceeded { .. })));
        let limits = Limits { degree_cap: 8, canonical_cap: 1 << 30 };
        assert_eq!(p.canonical_with(&limits).unwrap_err(), Error::DegreeCap { degree: 9, cap: 8 });
    }

    #[test]
    fn evaluate_examples() {
        let a = alg(SubalgebraSpec::Scalars, 2);
        let m = model(&a, diag(&[1.0, -1.0]));
        assert!(close(&NCPoly::x(a.clone()).evaluate(&m).unwrap(), &diag(&[1.0, -1.0])));

        let d = alg(SubalgebraSpec::Diagonal, 2);
        let b0 = diag(&[2.0, 7.0]);
        let m = model(&d, diag(&[1.0, -1.0]));
        let p = NCPoly::constant(d.clone(), Coefficient::anonymous(b0.clone())).unwrap();
        assert!(close(&p.evaluate(&m).unwrap(), &b0));

        let swap = Mat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let m = model(&a, swap);
        assert!(close(&NCPoly::x(a.clone()).pow(2).evaluate(&m).unwrap(), &identity(2)));
    }

    #[test]
    fn norm_r_examples() {
        let a = alg(SubalgebraSpec::Diagonal, 2);
        let one = NCPoly::one(a.clone());
        assert!((one.norm_r_upper(2.0, Representation::Stored).unwrap() - 1.0).abs() < 1e-14);
        let t = NCPoly::x(a.clone());
        assert!((t.norm_r_upper(2.0, Representation::Stored).unwrap() - 2.0).abs() < 1e-14);
        let m = Monomial::new(
            &a,
            vec![Coefficient::anonymous(diag(&[3.0, 1.0])), Coefficient::anonymous(diag(&[0.5, -0.25]))],
        )
        .unwrap();
        let p = NCPoly::monomial(a.clone(), m).unwrap();
        assert!((p.norm_r_upper(2.0, Representation::Stored).unwrap() - 3.0).abs() < 1e-13);
        assert_eq!(p.norm_r_upper(0.0, Representation::Stored).unwrap_err(), Error::NonPositiveRadius(0.0));
        let (best, _) = p.norm_r_upper_best(2.0).unwrap();
        assert!(best <= 3.0 + 1e-13);
    }

    #[test]
    fn word_order_is_degree_then_lex() {
        let mut words = vec![Word(vec![1, 0]), Word(vec![2]), Word(vec![0, 1]), Word(vec![0, 0, 0])];
        words.sort();
        assert_eq!(words, vec![Word(vec![2]), Word(vec![0, 1]), Word(vec![1, 0]), Word(vec![0, 0, 0])]);
    }
}
