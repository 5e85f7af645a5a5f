//! The model document: one JSON file describing `(B, X)`, the named
//! coefficients, and the suite settings.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "B": {"type": "diagonal"},
//!   "X": [[0, 1], [1, 0]],
//!   "coefficients": {"b0": [[1, 0], [0, 2]]},
//!   "tolerance": 1e-9,
//!   "seed": 7,
//!   "trials": 200
//! }
//! ```
//!
//! `X` is drawn from `seed` when absent. Suite fields (`trials`,
//! `dim_range`, `max_degree`, ...) are read from the same document; a
//! `dim` without `dim_range` pins the suite to that dimension.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use super::parse::Coefficients;
use crate::coeff_algebra::{build_subalgebra, matrix_json, BuildOptions, Mat, MatrixModel, SubalgebraSpec};
use crate::error::Error;
use crate::models_rng::{one_or_many, random_model, resolve_spec, trial_rng, SuiteConfig};

/// Used when no model file is given: `M_2 (+) M_2` inside `M_4`, `X`
/// drawn from seed 0, and every undeclared name bound to a fixed element.
pub const DEFAULT_DIM: usize = 4;
pub const DEFAULT_BLOCKS: [usize; 2] = [2, 2];

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("malformed model document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid model: {0}")]
    Model(#[from] Error),
}

#[derive(Debug, Deserialize)]
struct MatEntry(#[serde(with = "matrix_json")] Mat);

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct ModelDoc {
    dim: Option<usize>,
    #[serde(rename = "B", deserialize_with = "one_or_many")]
    b: Vec<SubalgebraSpec>,
    #[serde(rename = "X", with = "matrix_json::option")]
    x: Option<Mat>,
    coefficients: BTreeMap<String, MatEntry>,
    tolerance: Option<f64>,
    seed: u64,
}

/// Everything a command needs.
#[derive(Debug, Clone)]
pub struct Session {
    pub model: MatrixModel,
    pub coefficients: Coefficients,
    pub suite: SuiteConfig,
}

fn build_model(
    spec: &SubalgebraSpec,
    dim: usize,
    x: Option<Mat>,
    seed: u64,
    tolerance: f64,
) -> Result<MatrixModel, Error> {
    let opts = BuildOptions {
        tolerance,
        ..Default::default()
    };
    let mut rng = trial_rng(seed, 0);
    match x {
        Some(x) => {
            let spec = resolve_spec(&mut rng, spec, dim);
            MatrixModel::new(Arc::new(build_subalgebra(&spec, dim, opts)?), x)
        }
        None => Ok(random_model(&mut rng, dim, spec, opts)?.0),
    }
}

pub fn default_session(tolerance: Option<f64>) -> Session {
    let tolerance = tolerance.unwrap_or(crate::coeff_algebra::DEFAULT_TOLERANCE);
    let spec = SubalgebraSpec::Blocks {
        sizes: Some(DEFAULT_BLOCKS.to_vec()),
    };
    let model = build_model(&spec, DEFAULT_DIM, None, 0, tolerance).expect("default model is valid");
    Session {
        coefficients: Coefficients::with_auto(model.algebra().clone(), 0),
        model,
        suite: SuiteConfig {
            tolerance,
            ..Default::default()
        },
    }
}

pub fn session_from_json(text: &str, tolerance: Option<f64>) -> Result<Session, LoadError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let doc = ModelDoc::deserialize(&value)?;
    let mut suite = SuiteConfig::deserialize(&value)?;

    let tolerance = tolerance
        .or(doc.tolerance)
        .unwrap_or(crate::coeff_algebra::DEFAULT_TOLERANCE);
    suite.tolerance = tolerance;
    let dim = match (doc.dim, &doc.x) {
        (Some(n), _) => n,
        (None, Some(x)) => x.nrows(),
        (None, None) => return Err(Error::Config("the model needs \"dim\" or \"X\"".into()).into()),
    };
    if value.get("dim_range").is_none() {
        suite.dim_range = [dim, dim];
    }
    let spec = doc.b.first().cloned().unwrap_or(SubalgebraSpec::Scalars);
    let model = build_model(&spec, dim, doc.x, doc.seed, tolerance)?;
    let mut coefficients = Coefficients::new(model.algebra().clone());
    for (name, MatEntry(m)) in doc.coefficients {
        coefficients
            .declare(&name, m)
            .map_err(|e| Error::Config(format!("coefficient {name:?}: {e}")))?;
    }
    Ok(Session {
        model,
        coefficients,
        suite,
    })
}

pub fn load_session(path: &Path, tolerance: Option<f64>) -> Result<Session, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    session_from_json(&text, tolerance)
}
