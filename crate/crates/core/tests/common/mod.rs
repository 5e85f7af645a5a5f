#![allow(dead_code)]

use ncpoincare::coeff_algebra::op_norm;
use ncpoincare::models_rng::{random_model, random_poly, trial_rng, TrialRng};
use ncpoincare::{BuildOptions, Mat, MatrixModel, NCPoly, SubalgebraSpec};

pub const SPECS: usize = 3;

pub fn spec(which: usize) -> SubalgebraSpec {
    match which % SPECS {
        0 => SubalgebraSpec::Scalars,
        1 => SubalgebraSpec::Diagonal,
        _ => SubalgebraSpec::Blocks { sizes: None },
    }
}

/// A seeded model together with the generator positioned right after it.
pub fn model(seed: u64, trial: u64, n: usize, which: usize) -> (MatrixModel, TrialRng) {
    let mut rng = trial_rng(seed, trial);
    let (m, _) = random_model(&mut rng, n, &spec(which), BuildOptions::default()).unwrap();
    (m, rng)
}

pub fn poly(rng: &mut TrialRng, m: &MatrixModel, max_degree: usize, max_terms: usize) -> NCPoly {
    random_poly(rng, m.algebra(), max_degree, max_terms, 1.0)
}

/// `|a - b| <= tol (1 + |b|)` in operator norm.
pub fn close(a: &Mat, b: &Mat, tol: f64) -> bool {
    op_norm(&(a - b)) <= tol * (1.0 + op_norm(b))
}
