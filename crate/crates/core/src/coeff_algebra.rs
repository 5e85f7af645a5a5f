//! Finite-dimensional model of the coefficient algebra `B` inside `M_N(C)`.
//!
//! `B` is stored as a basis that is orthonormal for the normalized trace
//! inner product `<a, b> = tau(a* b)`. The conditional expectation onto `B`
//! is the orthogonal projection in that inner product, which for a unital
//! *-subalgebra is the unique trace-preserving conditional expectation.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat = DMatrix<Complex64>;

/// Default absolute tolerance, scaled by the magnitude of the inputs.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Default cap on the dimension of a generated subalgebra.
pub const DEFAULT_ALGEBRA_DIM_CAP: usize = 256;

// Relative size below which a Gram-Schmidt residual is treated as linearly
// dependent during generator closure.
const RANK_TOLERANCE: f64 = 1e-8;

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

/// Normalized trace `tau(a) = tr(a) / N`.
pub fn tau(a: &Mat) -> Complex64 {
    a.trace() / a.nrows() as f64
}

/// `tau(a* b)`.
pub fn tau_inner(a: &Mat, b: &Mat) -> Complex64 {
    a.dotc(b) / a.nrows() as f64
}

/// `|a|_2 = tau(a* a)^{1/2}`.
pub fn l2_norm(a: &Mat) -> f64 {
    (a.norm_squared() / a.nrows() as f64).sqrt()
}

/// Spectral norm (largest singular value).
pub fn op_norm(a: &Mat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().max()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l2: f64,
    pub op: f64,
}

/// Both norms of a square matrix.
pub fn norms(a: &Mat) -> Result<Norms> {
    ensure_square(a)?;
    Ok(Norms {
        l2: l2_norm(a),
        op: op_norm(a),
    })
}

pub(crate) fn ensure_square(a: &Mat) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(())
}

fn ensure_dim(a: &Mat, n: usize) -> Result<()> {
    ensure_square(a)?;
    if a.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.nrows(),
        });
    }
    Ok(())
}

/// How to build the subalgebra `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SubalgebraSpec {
    /// `C * 1`.
    Scalars,
    /// Diagonal matrices.
    Diagonal,
    /// Block-diagonal matrices. `sizes` must sum to `N`; when absent, a
    /// random suite draws a composition of `N` per trial.
    Blocks {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sizes: Option<Vec<usize>>,
    },
    /// The unital *-algebra generated by the given matrices.
    Generators {
        #[serde(with = "matrix_json::list")]
        matrices: Vec<Mat>,
    },
}

impl SubalgebraSpec {
    pub fn label(&self) -> String {
        match self {
            SubalgebraSpec::Scalars => "scalars".into(),
            SubalgebraSpec::Diagonal => "diagonal".into(),
            SubalgebraSpec::Blocks { sizes: Some(s) } => format!("blocks{s:?}"),
            SubalgebraSpec::Blocks { sizes: None } => "blocks".into(),
            SubalgebraSpec::Generators { matrices } => format!("generators({})", matrices.len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub tolerance: f64,
    pub dim_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            dim_cap: DEFAULT_ALGEBRA_DIM_CAP,
        }
    }
}

/// A unital *-subalgebra of `M_N(C)` with a tau-orthonormal basis.
#[derive(Debug, Clone)]
pub struct CoeffAlgebra {
    ambient_dim: usize,
    basis: Vec<Mat>,
    contains_unit: bool,
    tolerance: f64,
}

impl CoeffAlgebra {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Mat] {
        &self.basis
    }

    pub fn contains_unit(&self) -> bool {
        self.contains_unit
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Coordinates `tau(e_k* a)` of `a` in the basis.
    pub fn coords(&self, a: &Mat) -> Vec<Complex64> {
        self.basis.iter().map(|e| tau_inner(e, a)).collect()
    }

    pub(crate) fn project(&self, a: &Mat) -> Mat {
        let n = self.ambient_dim;
        let mut out = Mat::zeros(n, n);
        for e in &self.basis {
            let c = tau_inner(e, a);
            if c != Complex64::new(0.0, 0.0) {
                out += e * c;
            }
        }
        out
    }

    /// `E[a] = sum_k tau(e_k* a) e_k`.
    pub fn conditional_expectation(&self, a: &Mat) -> Result<Mat> {
        ensure_dim(a, self.ambient_dim)?;
        Ok(self.project(a))
    }

    /// L2 distance from `a` to `B`.
    pub fn distance(&self, a: &Mat) -> f64 {
        l2_norm(&(a - self.project(a)))
    }

    /// Checks that `a` lies in `B` up to `tolerance * (1 + |a|_2)`.
    pub fn check_member(&self, a: &Mat) -> Result<()> {
        ensure_dim(a, self.ambient_dim)?;
        let distance = self.distance(a);
        if distance > self.tolerance * (1.0 + l2_norm(a)) {
            return Err(Error::NotInSubalgebra { distance });
        }
        Ok(())
    }

    /// Builds the algebra from an already orthonormal basis and verifies
    /// every invariant.
    pub fn from_orthonormal_basis(n: usize, basis: Vec<Mat>, tolerance: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSubalgebra("ambient dimension must be positive".into()));
        }
        for e in &basis {
            ensure_dim(e, n)?;
        }
        let mut alg = CoeffAlgebra {
            ambient_dim: n,
            basis,
            contains_unit: false,
            tolerance,
        };
        alg.verify()?;
        alg.contains_unit = true;
        Ok(alg)
    }

    fn verify(&self) -> Result<()> {
        let tol = self.tolerance;
        let d = self.basis.len();
        if d == 0 {
            return Err(Error::SubalgebraInvariant("empty basis".into()));
        }
        for j in 0..d {
            for k in 0..d {
                let g = tau_inner(&self.basis[j], &self.basis[k]);
                let want = if j == k { 1.0 } else { 0.0 };
                if (g - want).norm() > tol {
                    return Err(Error::SubalgebraInvariant(format!(
                        "basis is not orthonormal: <e{j}, e{k}> = {g}"
                    )));
                }
            }
        }
        let unit = identity(self.ambient_dim);
        if self.distance(&unit) > tol {
            return Err(Error::SubalgebraInvariant("identity is not in the span".into()));
        }
        for (j, a) in self.basis.iter().enumerate() {
            let adj = a.adjoint();
            if self.distance(&adj) > tol * (1.0 + l2_norm(&adj)) {
                return Err(Error::SubalgebraInvariant(format!("span is not closed under adjoint at e{j}")));
            }
            for (k, b) in self.basis.iter().enumerate() {
                let prod = a * b;
                if self.distance(&prod) > tol * (1.0 + l2_norm(&prod)) {
                    return Err(Error::SubalgebraInvariant(format!(
                        "span is not closed under multiplication at e{j}*e{k}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Builds `B` inside `M_N(C)` according to `spec`.
pub fn build_subalgebra(spec: &SubalgebraSpec, n: usize, opts: BuildOptions) -> Result<CoeffAlgebra> {
    if n == 0 {
        return Err(Error::InvalidSubalgebra("ambient dimension must be positive".into()));
    }
    let scale = Complex64::new((n as f64).sqrt(), 0.0);
    let unit_at = |i: usize, j: usize| {
        let mut m = Mat::zeros(n, n);
        m[(i, j)] = scale;
        m
    };
    let basis = match spec {
        SubalgebraSpec::Scalars => vec![identity(n)],
        SubalgebraSpec::Diagonal => (0..n).map(|i| unit_at(i, i)).collect(),
        SubalgebraSpec::Blocks { sizes } => {
            let sizes = sizes
                .as_ref()
                .ok_or_else(|| Error::InvalidSubalgebra("blocks need explicit sizes for a fixed model".into()))?;
            if sizes.contains(&0) || sizes.iter().sum::<usize>() != n {
                return Err(Error::InvalidSubalgebra(format!(
                    "block sizes {sizes:?} must be positive and sum to {n}"
                )));
            }
            let mut basis = Vec::new();
            let mut offset = 0;
            for &s in sizes {
                for i in 0..s {
                    for j in 0..s {
                        basis.push(unit_at(offset + i, offset + j));
                    }
                }
                offset += s;
            }
            basis
        }
        SubalgebraSpec::Generators { matrices } => {
            for m in matrices {
                ensure_dim(m, n)?;
            }
            close_generators(n, matrices, opts.dim_cap)?
        }
    };
    if basis.len() > opts.dim_cap {
        return Err(Error::AlgebraDimensionCap { cap: opts.dim_cap });
    }
    CoeffAlgebra::from_orthonormal_basis(n, basis, opts.tolerance)
}

/// Appends the normalized component of `a` orthogonal to `basis`, if it is
/// numerically nonzero. Two Gram-Schmidt passes keep the basis orthonormal.
fn extend_orthonormal(basis: &mut Vec<Mat>, a: &Mat) -> bool {
    let scale = l2_norm(a);
    if scale == 0.0 {
        return false;
    }
    let mut v = a.clone();
    for _ in 0..2 {
        for e in basis.iter() {
            let c = tau_inner(e, &v);
            v += e * -c;
        }
    }
    let r = l2_norm(&v);
    if r <= RANK_TOLERANCE * scale.max(1.0) {
        return false;
    }
    basis.push(v.unscale(r));
    true
}

fn close_generators(n: usize, gens: &[Mat], cap: usize) -> Result<Vec<Mat>> {
    let mut basis = Vec::new();
    extend_orthonormal(&mut basis, &identity(n));
    for g in gens {
        extend_orthonormal(&mut basis, g);
        extend_orthonormal(&mut basis, &g.adjoint());
        if basis.len() > cap {
            return Err(Error::AlgebraDimensionCap { cap });
        }
    }
    // Each pass multiplies every new element against the whole basis; the
    // span stops growing once a pass adds nothing.
    let mut done = 0;
    while done < basis.len() {
        let i = done;
        done += 1;
        let a = basis[i].clone();
        extend_orthonormal(&mut basis, &a.adjoint());
        let mut j = 0;
        while j < basis.len() {
            let b = basis[j].clone();
            extend_orthonormal(&mut basis, &(&a * &b));
            extend_orthonormal(&mut basis, &(&b * &a));
            if basis.len() > cap {
                return Err(Error::AlgebraDimensionCap { cap });
            }
            j += 1;
        }
    }
    Ok(basis)
}

/// The data `(B, X)`: a coefficient algebra and a self-adjoint matrix.
#[derive(Debug, Clone)]
pub struct MatrixModel {
    algebra: Arc<CoeffAlgebra>,
    x: Mat,
}

impl MatrixModel {
    pub fn new(algebra: Arc<CoeffAlgebra>, x: Mat) -> Result<Self> {
        ensure_dim(&x, algebra.ambient_dim())?;
        let skew = op_norm(&(&x - x.adjoint()));
        if skew > algebra.tolerance() * (1.0 + op_norm(&x)) {
            return Err(Error::NotSelfAdjoint(skew));
        }
        Ok(Self { algebra, x })
    }

    pub fn algebra(&self) -> &Arc<CoeffAlgebra> {
        &self.algebra
    }

    pub fn x(&self) -> &Mat {
        &self.x
    }

    pub fn dim(&self) -> usize {
        self.algebra.ambient_dim()
    }

    pub fn tolerance(&self) -> f64 {
        self.algebra.tolerance()
    }
}

/// JSON encoding of complex matrices as rows of `[re, im]` pairs. A bare
/// number is accepted as a real entry.
pub mod matrix_json {
    use super::Mat;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Pair([f64; 2]),
        Real(f64),
    }

    pub fn to_rows(m: &Mat) -> Vec<Vec<[f64; 2]>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect()
    }

    fn from_rows<E: serde::de::Error>(rows: Vec<Vec<Entry>>) -> Result<Mat, E> {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(E::custom("ragged matrix rows"));
        }
        let mut m = Mat::zeros(n, cols);
        for (i, row) in rows.into_iter().enumerate() {
            for (j, e) in row.into_iter().enumerate() {
                m[(i, j)] = match e {
                    Entry::Pair([re, im]) => Complex64::new(re, im),
                    Entry::Real(re) => Complex64::new(re, 0.0),
                };
            }
        }
        Ok(m)
    }

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat, D::Error> {
        from_rows(Vec::<Vec<Entry>>::deserialize(d)?)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(m: &Option<Mat>, s: S) -> Result<S::Ok, S::Error> {
            m.as_ref().map(to_rows).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Mat>, D::Error> {
            Option::<Vec<Vec<Entry>>>::deserialize(d)?
                .map(from_rows)
                .transpose()
        }
    }

    pub mod list {
        use super::*;

        pub fn serialize<S: Serializer>(ms: &[Mat], s: S) -> Result<S::Ok, S::Error> {
            ms.iter().map(to_rows).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Mat>, D::Error> {
            Vec::<Vec<Vec<Entry>>>::deserialize(d)?
                .into_iter()
                .map(from_rows)
                .collect()
        }
    }
}
