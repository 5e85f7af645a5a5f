//! Seeded generation of matrix models and random polynomials.
//!
//! Every trial owns an independent generator: `ChaCha8Rng` seeded from the
//! master seed with the trial index as its stream id, so trial `i` replays
//! bit-exactly regardless of how many other trials run or in which order.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize};

use crate::coeff_algebra::{build_subalgebra, op_norm, BuildOptions, CoeffAlgebra, Mat, MatrixModel, SubalgebraSpec};
use crate::error::{Error, Result};
use crate::ncpoly::{Coefficient, Monomial, NCPoly, DEFAULT_DEGREE_CAP};

/// Recorded in report headers so suites can be replayed elsewhere.
pub const GENERATOR_FAMILY: &str = "ChaCha8Rng(seed_from_u64(seed), stream = trial index), rand 0.9";

pub type TrialRng = ChaCha8Rng;

pub fn trial_rng(seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub dim_range: [usize; 2],
    #[serde(rename = "B", deserialize_with = "one_or_many")]
    pub b_specs: Vec<SubalgebraSpec>,
    pub max_degree: usize,
    pub max_terms: usize,
    pub coeff_scale: f64,
    #[serde(rename = "R_factor")]
    pub r_factor: f64,
    pub tolerance: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 100,
            dim_range: [2, 8],
            b_specs: vec![
                SubalgebraSpec::Scalars,
                SubalgebraSpec::Diagonal,
                SubalgebraSpec::Blocks { sizes: None },
            ],
            max_degree: 6,
            max_terms: 8,
            coeff_scale: 1.0,
            r_factor: 2.0,
            tolerance: crate::coeff_algebra::DEFAULT_TOLERANCE,
        }
    }
}

pub(crate) fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<SubalgebraSpec>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(SubalgebraSpec),
        Many(Vec<SubalgebraSpec>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    })
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.dim_range;
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if lo == 0 || lo > hi {
            return fail("dim_range must be a nonempty range of positive dimensions");
        }
        if self.b_specs.is_empty() {
            return fail("at least one subalgebra spec is required");
        }
        if self.max_degree > DEFAULT_DEGREE_CAP {
            return Err(Error::DegreeCap {
                degree: self.max_degree,
                cap: DEFAULT_DEGREE_CAP,
            });
        }
        if self.max_terms == 0 {
            return fail("max_terms must be positive");
        }
        if self.coeff_scale.is_nan() || self.coeff_scale <= 0.0 {
            return fail("coeff_scale must be positive");
        }
        if self.r_factor.is_nan() || self.r_factor <= 1.0 {
            return fail("R_factor must exceed 1");
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return fail("tolerance must be positive");
        }
        Ok(())
    }
}

pub(crate) fn complex_gaussian(rng: &mut TrialRng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// A random composition of `n` into positive block sizes.
pub fn random_block_sizes(rng: &mut TrialRng, n: usize) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut current = 1;
    for _ in 1..n {
        if rng.random_bool(0.5) {
            sizes.push(current);
            current = 1;
        } else {
            current += 1;
        }
    }
    sizes.push(current);
    sizes
}

/// Replaces size-free block specs with a random composition of `n`.
pub fn resolve_spec(rng: &mut TrialRng, spec: &SubalgebraSpec, n: usize) -> SubalgebraSpec {
    match spec {
        SubalgebraSpec::Blocks { sizes: None } => SubalgebraSpec::Blocks {
            sizes: Some(random_block_sizes(rng, n)),
        },
        other => other.clone(),
    }
}

/// A random self-adjoint `X = (G + G*)/2` rescaled to unit operator norm.
pub fn random_self_adjoint(rng: &mut TrialRng, n: usize) -> Mat {
    let g = Mat::from_fn(n, n, |_, _| complex_gaussian(rng));
    let x = (&g + g.adjoint()).unscale(2.0);
    let norm = op_norm(&x);
    if norm == 0.0 {
        Mat::identity(n, n)
    } else {
        x.unscale(norm)
    }
}

/// Builds `B` per `spec` (resolving random block sizes) and draws `X`.
pub fn random_model(
    rng: &mut TrialRng,
    n: usize,
    spec: &SubalgebraSpec,
    opts: BuildOptions,
) -> Result<(MatrixModel, SubalgebraSpec)> {
    let spec = resolve_spec(rng, spec, n);
    let alg = Arc::new(build_subalgebra(&spec, n, opts)?);
    let x = random_self_adjoint(rng, n);
    Ok((MatrixModel::new(alg, x)?, spec))
}

/// A random element of `B` with operator norm in `(0, scale]`.
pub fn random_coefficient(rng: &mut TrialRng, alg: &CoeffAlgebra, scale: f64) -> Mat {
    let n = alg.ambient_dim();
    let mut b = Mat::zeros(n, n);
    for e in alg.basis() {
        b += e * complex_gaussian(rng);
    }
    let target = scale * (1.0 - rng.random::<f64>());
    let norm = op_norm(&b);
    if norm == 0.0 {
        return Mat::identity(n, n).scale(target);
    }
    b.scale(target / norm)
}

/// A random polynomial with `1..=max_terms` terms, each of degree uniform
/// in `0..=max_degree`, with anonymous coefficients drawn from `B`.
pub fn random_poly(
    rng: &mut TrialRng,
    alg: &Arc<CoeffAlgebra>,
    max_degree: usize,
    max_terms: usize,
    coeff_scale: f64,
) -> NCPoly {
    let count = rng.random_range(1..=max_terms.max(1));
    let terms = (0..count)
        .map(|_| {
            let degree = rng.random_range(0..=max_degree);
            let coeffs = (0..=degree)
                .map(|_| Coefficient::anonymous(random_coefficient(rng, alg, coeff_scale)))
                .collect();
            let phase = rng.random::<f64>() * std::f64::consts::TAU;
            let weight = Complex64::from_polar(0.25 + 0.75 * rng.random::<f64>(), phase);
            (weight, Monomial::from_coeffs_unchecked(coeffs))
        })
        .collect();
    NCPoly::from_terms_unchecked(alg.clone(), terms)
}

// The second polynomial of a trial (the right factor of product checks)
// stays small.
const SECOND_MAX_DEGREE: usize = 2;
const SECOND_MAX_TERMS: usize = 3;

/// Everything drawn for one suite trial.
#[derive(Debug, Clone)]
pub struct TrialDraw {
    pub spec: SubalgebraSpec,
    pub model: MatrixModel,
    pub p: NCPoly,
    pub q: NCPoly,
}

/// Draws trial `trial` of `config`: `N`, the subalgebra, `X`, and the
/// polynomials `p` and `q`, in that order from the trial's own stream.
pub fn draw_trial(config: &SuiteConfig, trial: usize) -> Result<TrialDraw> {
    let mut rng = trial_rng(config.seed, trial as u64);
    let [lo, hi] = config.dim_range;
    let n = rng.random_range(lo..=hi);
    let spec = &config.b_specs[rng.random_range(0..config.b_specs.len())];
    let opts = BuildOptions {
        tolerance: config.tolerance,
        ..Default::default()
    };
    let (model, spec) = random_model(&mut rng, n, spec, opts)?;
    let alg = model.algebra().clone();
    let p = random_poly(&mut rng, &alg, config.max_degree, config.max_terms, config.coeff_scale);
    let q = random_poly(
        &mut rng,
        &alg,
        SECOND_MAX_DEGREE.min(config.max_degree),
        SECOND_MAX_TERMS.min(config.max_terms),
        config.coeff_scale,
    );
    Ok(TrialDraw { spec, model, p, q })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_model_is_sign() {
        let mut rng = trial_rng(7, 0);
        let (m, _) = random_model(&mut rng, 1, &SubalgebraSpec::Scalars, BuildOptions::default()).unwrap();
        let v = m.x()[(0, 0)];
        assert!((v.re.abs() - 1.0).abs() < 1e-15 && v.im == 0.0);
    }

    #[test]
    fn same_seed_same_model() {
        let draw = |seed, trial| {
            let mut rng = trial_rng(seed, trial);
            random_model(&mut rng, 4, &SubalgebraSpec::Blocks { sizes: None }, BuildOptions::default())
                .unwrap()
                .0
                .x()
                .clone()
        };
        assert_eq!(draw(3, 5), draw(3, 5));
        assert_ne!(draw(3, 5), draw(3, 6));
        assert_ne!(draw(3, 5), draw(4, 5));
    }

    #[test]
    fn model_is_normalized_and_self_adjoint() {
        let mut rng = trial_rng(11, 2);
        let (m, _) = random_model(&mut rng, 4, &SubalgebraSpec::Diagonal, BuildOptions::default()).unwrap();
        let x = m.x();
        assert!(op_norm(&(x - x.adjoint())) <= 1e-14);
        assert!((op_norm(x) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn block_sizes_compose_n() {
        let mut rng = trial_rng(1, 1);
        for n in 1..10 {
            let s = random_block_sizes(&mut rng, n);
            assert_eq!(s.iter().sum::<usize>(), n);
            assert!(s.iter().all(|&k| k > 0));
        }
    }

    #[test]
    fn degree_zero_polys_are_constants() {
        let mut rng = trial_rng(5, 0);
        let (m, _) = random_model(&mut rng, 3, &SubalgebraSpec::Diagonal, BuildOptions::default()).unwrap();
        let p = random_poly(&mut rng, m.algebra(), 0, 4, 1.0);
        assert_eq!(p.degree(), 0);
        let q = random_poly(&mut rng, m.algebra(), 1, 1, 1.0);
        assert_eq!(q.terms().len(), 1);
        assert!(q.degree() <= 1);
    }

    #[test]
    fn coefficients_stay_in_b_with_bounded_norm() {
        let mut rng = trial_rng(9, 3);
        let spec = SubalgebraSpec::Blocks { sizes: Some(vec![2, 2]) };
        let (m, _) = random_model(&mut rng, 4, &spec, BuildOptions::default()).unwrap();
        let p = random_poly(&mut rng, m.algebra(), 4, 6, 0.5);
        for (_, mono) in p.terms() {
            for c in mono.coeffs() {
                m.algebra().check_member(c.matrix()).unwrap();
                assert!(op_norm(c.matrix()) <= 0.5 + 1e-12);
            }
        }
    }

    #[test]
    fn replayed_polys_are_canonically_equal() {
        let draw = || {
            let mut rng = trial_rng(42, 9);
            let (m, _) = random_model(&mut rng, 2, &SubalgebraSpec::Diagonal, BuildOptions::default()).unwrap();
            random_poly(&mut rng, m.algebra(), 3, 3, 1.0)
        };
        let (p, q) = (draw(), draw());
        assert!(p.canonical().unwrap().approx_eq(q.canonical().unwrap(), 0.0));
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg: SuiteConfig = serde_json::from_str(r#"{"seed": 3, "B": {"type": "diagonal"}}"#).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.b_specs, vec![SubalgebraSpec::Diagonal]);
        assert_eq!(cfg.trials, 100);
        cfg.validate().unwrap();
        let bad = SuiteConfig { r_factor: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SuiteConfig { dim_range: [4, 2], ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
