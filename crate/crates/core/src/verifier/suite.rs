use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    check_kernel, check_lemma4_bounds, check_poincare, check_sobolev_submultiplicative, check_telescoping,
    CheckKind, CheckReport, NormVariant,
};
use crate::coeff_algebra::op_norm;
use crate::error::Result;
use crate::models_rng::{draw_trial, SuiteConfig, TrialDraw, GENERATOR_FAMILY};
use crate::ncpoly::Representation;

const TIGHTNESS_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteHeader {
    pub generator: String,
    pub config_digest: String,
    pub config: SuiteConfig,
}

/// A check that could not run for one trial (typically a cap violation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialError {
    pub trial: usize,
    pub check_name: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckStats {
    pub count: usize,
    pub failures: usize,
    pub min_margin: Option<f64>,
    pub max_residual: Option<f64>,
}

/// Distribution of `lhs / rhs` for the L2 Poincaré check over trials with a
/// positive right-hand side. Exploratory only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tightness {
    pub samples: usize,
    pub quantiles: BTreeMap<String, f64>,
    pub histogram: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub trials: usize,
    pub checks: usize,
    pub failures: usize,
    pub errors: usize,
    pub all_pass: bool,
    pub min_poincare_margin_l2: Option<f64>,
    pub min_poincare_margin_op: Option<f64>,
    pub max_telescoping_residual: Option<f64>,
    pub per_check: BTreeMap<String, CheckStats>,
    pub poincare_tightness: Tightness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub header: SuiteHeader,
    pub summary: SuiteSummary,
    pub trials: Vec<CheckReport>,
    pub errors: Vec<TrialError>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }
}

pub fn config_digest(config: &SuiteConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config is serializable");
    hex::encode(&Sha256::digest(&bytes)[..8])
}

struct TrialOutcome {
    reports: Vec<CheckReport>,
    errors: Vec<TrialError>,
}

fn run_trial(config: &SuiteConfig, digest: &str, trial: usize) -> TrialOutcome {
    let mut out = TrialOutcome {
        reports: Vec::new(),
        errors: Vec::new(),
    };
    let TrialDraw { spec, model, p, q } = match draw_trial(config, trial) {
        Ok(d) => d,
        Err(e) => {
            out.errors.push(TrialError {
                trial,
                check_name: "model".into(),
                error: e.to_string(),
            });
            return out;
        }
    };
    let radius = config.r_factor * op_norm(model.x());
    let tag = format!(
        "seed={};trial={};N={};B={};deg={};terms={};cfg={}",
        config.seed,
        trial,
        model.dim(),
        spec.label(),
        p.degree(),
        p.terms().len(),
        digest
    );

    let mut record = |name: &str, r: Result<Vec<CheckReport>>| match r {
        Ok(reports) => out
            .reports
            .extend(reports.into_iter().map(|r| r.with_trial(trial).with_digest(tag.clone()))),
        Err(e) => out.errors.push(TrialError {
            trial,
            check_name: name.to_string(),
            error: e.to_string(),
        }),
    };
    record("telescoping", check_telescoping(&p, &model).map(|r| vec![r]));
    record("poincare_l2", check_poincare(&p, &model, NormVariant::L2).map(|r| vec![r]));
    record("poincare_op", check_poincare(&p, &model, NormVariant::Op).map(|r| vec![r]));
    record("kernel", check_kernel(&p).map(|r| vec![r]));
    record(
        "lemma4",
        check_lemma4_bounds(&p, radius, &model, Representation::Stored).map(Vec::from),
    );
    record(
        "sobolev_submultiplicative",
        check_sobolev_submultiplicative(&p, &q, &model).map(|r| vec![r]),
    );
    out
}

fn min_opt(acc: Option<f64>, v: f64) -> Option<f64> {
    Some(acc.map_or(v, |a| a.min(v)))
}

fn max_opt(acc: Option<f64>, v: f64) -> Option<f64> {
    Some(acc.map_or(v, |a| a.max(v)))
}

fn tightness(reports: &[CheckReport]) -> Tightness {
    let mut ratios: Vec<f64> = reports
        .iter()
        .filter(|r| r.check_name == "poincare_l2" && r.rhs > 0.0)
        .map(|r| r.lhs / r.rhs)
        .collect();
    ratios.sort_by(f64::total_cmp);
    let mut histogram = vec![0; TIGHTNESS_BINS];
    for &r in &ratios {
        let bin = ((r * TIGHTNESS_BINS as f64) as usize).min(TIGHTNESS_BINS - 1);
        histogram[bin] += 1;
    }
    let mut quantiles = BTreeMap::new();
    if !ratios.is_empty() {
        for (name, q) in [("min", 0.0), ("p10", 0.1), ("p50", 0.5), ("p90", 0.9), ("max", 1.0)] {
            let idx = ((ratios.len() - 1) as f64 * q).round() as usize;
            quantiles.insert(name.to_string(), ratios[idx]);
        }
    }
    Tightness {
        samples: ratios.len(),
        quantiles,
        histogram,
    }
}

fn summarize(trials: usize, reports: &[CheckReport], errors: &[TrialError]) -> SuiteSummary {
    let mut s = SuiteSummary {
        trials,
        checks: reports.len(),
        errors: errors.len(),
        ..Default::default()
    };
    for r in reports {
        let stats = s.per_check.entry(r.check_name.clone()).or_default();
        stats.count += 1;
        if !r.pass {
            stats.failures += 1;
            s.failures += 1;
        }
        match r.kind {
            CheckKind::Inequality => stats.min_margin = min_opt(stats.min_margin, r.margin),
            CheckKind::Identity => stats.max_residual = max_opt(stats.max_residual, r.residual),
            CheckKind::Equivalence => {}
        }
        match r.check_name.as_str() {
            "poincare_l2" => s.min_poincare_margin_l2 = min_opt(s.min_poincare_margin_l2, r.margin),
            "poincare_op" => s.min_poincare_margin_op = min_opt(s.min_poincare_margin_op, r.margin),
            "telescoping" => s.max_telescoping_residual = max_opt(s.max_telescoping_residual, r.residual),
            _ => {}
        }
    }
    s.all_pass = s.failures == 0;
    s.poincare_tightness = tightness(reports);
    s
}

/// Runs every check over `config.trials` seeded trials. Trials run in
/// parallel and are merged in trial order, so the report depends only on
/// the configuration.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    config.validate()?;
    let digest = config_digest(config);
    let outcomes: Vec<TrialOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, &digest, t))
        .collect();
    let mut trials = Vec::new();
    let mut errors = Vec::new();
    for o in outcomes {
        trials.extend(o.reports);
        errors.extend(o.errors);
    }
    let summary = summarize(config.trials, &trials, &errors);
    Ok(SuiteReport {
        header: SuiteHeader {
            generator: GENERATOR_FAMILY.to_string(),
            config_digest: digest,
            config: config.clone(),
        },
        summary,
        trials,
        errors,
    })
}
