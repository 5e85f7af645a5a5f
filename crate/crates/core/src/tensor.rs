//! The algebraic tensor square `B<X> (x) B<X>`.
//!
//! Elements are weighted sums of monomial pairs `l (x) r`. Besides the
//! vector-space operations this module provides the `sharp` product
//! `(a1 (x) a2) # (a3 (x) a4) = a1 a3 (x) a4 a2`, the outer bimodule action,
//! the multiplication map, and norm bounds on evaluated tensors.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::coeff_algebra::{op_norm, CoeffAlgebra, Mat, MatrixModel};
use crate::error::{Error, Result};
use crate::ncpoly::{max_abs_diff, same_algebra, Limits, Monomial, NCPoly, Representation, Word, DROP_THRESHOLD};

/// Largest number of canonical word pairs `pi_upper` will evaluate.
pub const DEFAULT_PI_EVAL_CAP: usize = 4096;

/// Largest ambient dimension for which the `N^2 x N^2` Kronecker evaluation
/// is attempted.
pub const DEFAULT_KRONECKER_CAP: usize = 16;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CanonicalTensor {
    entries: BTreeMap<(Word, Word), Complex64>,
}

impl CanonicalTensor {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, left: &Word, right: &Word) -> Option<Complex64> {
        self.entries.get(&(left.clone(), right.clone())).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Word, Word), &Complex64)> {
        self.entries.iter()
    }

    pub fn max_abs_diff(&self, other: &CanonicalTensor) -> f64 {
        max_abs_diff(&self.entries, &other.entries)
    }

    pub fn approx_eq(&self, other: &CanonicalTensor, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }
}

/// An element `sum_i w_i l_i (x) r_i` of the tensor square.
#[derive(Debug, Clone)]
pub struct TensorElem {
    algebra: Arc<CoeffAlgebra>,
    terms: Vec<(Complex64, Monomial, Monomial)>,
    canonical: OnceLock<Result<CanonicalTensor>>,
}

impl TensorElem {
    pub(crate) fn from_terms_unchecked(algebra: Arc<CoeffAlgebra>, terms: Vec<(Complex64, Monomial, Monomial)>) -> Self {
        Self {
            algebra,
            terms,
            canonical: OnceLock::new(),
        }
    }

    pub fn zero(algebra: Arc<CoeffAlgebra>) -> Self {
        Self::from_terms_unchecked(algebra, Vec::new())
    }

    /// `p (x) q`, distributed over the stored terms of both factors.
    pub fn pure(p: &NCPoly, q: &NCPoly) -> Result<Self> {
        same_algebra(p.algebra(), q.algebra())?;
        let mut terms = Vec::with_capacity(p.terms().len() * q.terms().len());
        for (wp, l) in p.terms() {
            for (wq, r) in q.terms() {
                terms.push((wp * wq, l.clone(), r.clone()));
            }
        }
        Ok(Self::from_terms_unchecked(p.algebra().clone(), terms))
    }

    /// `1 (x) 1`.
    pub fn unit(algebra: Arc<CoeffAlgebra>) -> Self {
        let n = algebra.ambient_dim();
        Self::from_terms_unchecked(algebra, vec![(ONE, Monomial::unit(n), Monomial::unit(n))])
    }

    /// `X (x) 1 - 1 (x) X`.
    pub fn commutator_probe(algebra: Arc<CoeffAlgebra>) -> Self {
        let n = algebra.ambient_dim();
        Self::from_terms_unchecked(
            algebra,
            vec![
                (ONE, Monomial::x(n), Monomial::unit(n)),
                (-ONE, Monomial::unit(n), Monomial::x(n)),
            ],
        )
    }

    pub fn algebra(&self) -> &Arc<CoeffAlgebra> {
        &self.algebra
    }

    pub fn terms(&self) -> &[(Complex64, Monomial, Monomial)] {
        &self.terms
    }

    pub fn add(&self, other: &TensorElem) -> Result<TensorElem> {
        same_algebra(&self.algebra, &other.algebra)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self::from_terms_unchecked(self.algebra.clone(), terms))
    }

    pub fn sub(&self, other: &TensorElem) -> Result<TensorElem> {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, c: Complex64) -> TensorElem {
        let terms = self.terms.iter().map(|(w, l, r)| (w * c, l.clone(), r.clone())).collect();
        Self::from_terms_unchecked(self.algebra.clone(), terms)
    }

    /// Bilinear extension of `(a1 (x) a2) # (a3 (x) a4) = a1 a3 (x) a4 a2`.
    pub fn sharp(&self, other: &TensorElem) -> Result<TensorElem> {
        same_algebra(&self.algebra, &other.algebra)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (w1, a1, a2) in &self.terms {
            for (w2, a3, a4) in &other.terms {
                terms.push((w1 * w2, a1.mul(a3), a4.mul(a2)));
            }
        }
        Ok(Self::from_terms_unchecked(self.algebra.clone(), terms))
    }

    /// `p . (l (x) r) . q = p l (x) r q`.
    pub fn bimodule_act(p: &NCPoly, u: &TensorElem, q: &NCPoly) -> Result<TensorElem> {
        same_algebra(p.algebra(), &u.algebra)?;
        same_algebra(&u.algebra, q.algebra())?;
        let mut terms = Vec::with_capacity(p.terms().len() * u.terms.len() * q.terms().len());
        for (wp, mp) in p.terms() {
            for (wu, l, r) in &u.terms {
                let left = mp.mul(l);
                for (wq, mq) in q.terms() {
                    terms.push((wp * wu * wq, left.clone(), r.mul(mq)));
                }
            }
        }
        Ok(Self::from_terms_unchecked(u.algebra.clone(), terms))
    }

    /// The multiplication map `l (x) r -> l r`.
    pub fn mu(&self) -> NCPoly {
        let terms = self.terms.iter().map(|(w, l, r)| (*w, l.mul(r))).collect();
        NCPoly::from_terms_unchecked(self.algebra.clone(), terms)
    }

    /// `(mu o (id (x) E))` of the evaluated tensor: `sum w l(X) E[r(X)]`.
    pub fn mu_id_e_eval(&self, model: &MatrixModel) -> Result<Mat> {
        same_algebra(&self.algebra, model.algebra())?;
        let n = model.dim();
        let x = model.x();
        let mut acc = Mat::zeros(n, n);
        for (w, l, r) in &self.terms {
            let right = self.algebra.project(&r.evaluate(x));
            acc += (l.evaluate(x) * right) * *w;
        }
        Ok(acc)
    }

    /// `sum |w| |l(X)| |r(X)|` over the stored terms.
    pub fn pi_upper_stored(&self, model: &MatrixModel) -> Result<f64> {
        same_algebra(&self.algebra, model.algebra())?;
        let x = model.x();
        Ok(self
            .terms
            .iter()
            .map(|(w, l, r)| {
                if *w == ZERO {
                    0.0
                } else {
                    w.norm() * op_norm(&l.evaluate(x)) * op_norm(&r.evaluate(x))
                }
            })
            .sum())
    }

    /// The same bound over the canonical word-pair representation.
    pub fn pi_upper_canonical(&self, model: &MatrixModel, eval_cap: usize) -> Result<f64> {
        same_algebra(&self.algebra, model.algebra())?;
        let canon = self.canonical()?;
        if canon.len() > eval_cap {
            return Err(Error::CapExceeded {
                what: "canonical tensor evaluation",
                size: canon.len() as u128,
                cap: eval_cap,
            });
        }
        let x = model.x();
        let mut cache: HashMap<&Word, f64> = HashMap::new();
        let mut total = 0.0;
        for ((l, r), c) in canon.iter() {
            let mut norm_of = |w| {
                *cache
                    .entry(w)
                    .or_insert_with(|| op_norm(&Monomial::from_word(&self.algebra, w).evaluate(x)))
            };
            total += c.norm() * norm_of(l) * norm_of(r);
        }
        Ok(total)
    }

    /// Upper bound on the projective norm of the evaluated tensor: the
    /// smaller of the stored and canonical representation bounds.
    pub fn pi_upper(&self, model: &MatrixModel) -> Result<(f64, Representation)> {
        self.pi_upper_with(model, DEFAULT_PI_EVAL_CAP)
    }

    pub fn pi_upper_with(&self, model: &MatrixModel, eval_cap: usize) -> Result<(f64, Representation)> {
        let stored = self.pi_upper_stored(model)?;
        match self.pi_upper_canonical(model, eval_cap) {
            Ok(c) if c < stored => Ok((c, Representation::Canonical)),
            Ok(_) | Err(Error::CapExceeded { .. }) | Err(Error::DegreeCap { .. }) => {
                Ok((stored, Representation::Stored))
            }
            Err(e) => Err(e),
        }
    }

    /// The terms `(w, l(X), r(X))` of the stored or canonical representation.
    pub fn evaluated_terms(&self, model: &MatrixModel, repr: Representation) -> Result<Vec<(Complex64, Mat, Mat)>> {
        same_algebra(&self.algebra, model.algebra())?;
        let x = model.x();
        Ok(match repr {
            Representation::Canonical => self
                .canonical()?
                .iter()
                .map(|((l, r), &c)| {
                    (
                        c,
                        Monomial::from_word(&self.algebra, l).evaluate(x),
                        Monomial::from_word(&self.algebra, r).evaluate(x),
                    )
                })
                .collect(),
            Representation::Stored | Representation::NotApplicable => self
                .terms
                .iter()
                .map(|(w, l, r)| (*w, l.evaluate(x), r.evaluate(x)))
                .collect(),
        })
    }

    /// Operator norm of `sum w l(X) (x) r(X)` as an `N^2 x N^2` matrix.
    pub fn spatial_norm(&self, model: &MatrixModel) -> Result<f64> {
        self.spatial_norm_with(model, DEFAULT_KRONECKER_CAP)
    }

    pub fn spatial_norm_with(&self, model: &MatrixModel, dim_cap: usize) -> Result<f64> {
        same_algebra(&self.algebra, model.algebra())?;
        let n = model.dim();
        if n > dim_cap {
            return Err(Error::CapExceeded {
                what: "Kronecker evaluation (ambient dimension)",
                size: n as u128,
                cap: dim_cap,
            });
        }
        Ok(op_norm(&self.kronecker_eval(model.x())))
    }

    pub(crate) fn kronecker_eval(&self, x: &Mat) -> Mat {
        let n = x.nrows();
        let mut acc = Mat::zeros(n * n, n * n);
        for (w, l, r) in &self.terms {
            acc += l.evaluate(x).kronecker(&r.evaluate(x)) * *w;
        }
        acc
    }

    pub fn canonical(&self) -> Result<&CanonicalTensor> {
        self.canonical
            .get_or_init(|| self.canonical_with(&Limits::default()))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn canonical_with(&self, limits: &Limits) -> Result<CanonicalTensor> {
        let mut acc: BTreeMap<(Word, Word), Complex64> = BTreeMap::new();
        let mut total = 0usize;
        for (w, l, r) in &self.terms {
            let left = l.expand(&self.algebra, limits)?;
            let right = r.expand(&self.algebra, limits)?;
            total += left.len() * right.len();
            if total > limits.canonical_cap {
                return Err(Error::CapExceeded {
                    what: "canonical tensor expansion",
                    size: total as u128,
                    cap: limits.canonical_cap,
                });
            }
            for (lw, lc) in &left {
                for (rw, rc) in &right {
                    *acc.entry((lw.clone(), rw.clone())).or_insert(ZERO) += w * lc * rc;
                }
            }
        }
        acc.retain(|_, w| w.norm() > DROP_THRESHOLD);
        Ok(CanonicalTensor { entries: acc })
    }

    pub fn canonical_eq(&self, other: &TensorElem, tol: f64) -> Result<bool> {
        same_algebra(&self.algebra, &other.algebra)?;
        Ok(self.canonical()?.approx_eq(other.canonical()?, tol))
    }
}
