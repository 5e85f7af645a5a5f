//! Command-line surface: expression parsing, model loading, and one
//! subcommand per verifier or derivation operation.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 expression or model
//! document error, 3 a check failed.

pub mod config;
pub mod parse;
pub mod print;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::coeff_algebra::op_norm;
use crate::derivation::fdq;
use crate::ncpoly::{NCPoly, Representation};
use crate::verifier::{self, CheckReport, NormVariant};
use config::{default_session, load_session, LoadError, Session};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CHECK: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ncpoincare", version, about = "Operator-coefficient free Poincaré inequality checker")]
struct Cli {
    /// Model document (JSON). Without it, a built-in M_2 (+) M_2 model is
    /// used and every coefficient name is bound automatically.
    #[arg(long, global = true)]
    model: Option<PathBuf>,

    /// Overrides the model's numerical tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the free difference quotient of a polynomial.
    Fdq {
        #[arg(long)]
        poly: String,
        /// Print the canonical basis-word form instead of coefficient names.
        #[arg(long)]
        canonical: bool,
    },
    /// Check the telescoping identity behind the Poincaré inequality.
    CheckIdentity {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        json: bool,
    },
    /// Check the Poincaré inequality in the L2 or operator norm.
    CheckPoincare {
        #[arg(long)]
        poly: String,
        #[arg(long, default_value = "l2")]
        variant: NormVariant,
        #[arg(long)]
        json: bool,
    },
    /// Check the functional-calculus norm bounds at radius R.
    CheckLemma4 {
        #[arg(long)]
        poly: String,
        /// Defaults to R_factor * |X|.
        #[arg(long = "R")]
        radius: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Run the randomized suite and emit a JSON report.
    Suite {
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the canonical basis-word form of a polynomial.
    PrintCanonical {
        #[arg(long)]
        poly: String,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }

    fn parse(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_PARSE,
            message: e.to_string(),
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { .. } => Failure::usage(e),
            _ => Failure::parse(e),
        }
    }
}

impl From<crate::error::Error> for Failure {
    fn from(e: crate::error::Error) -> Self {
        Failure::usage(e)
    }
}

fn parse_poly(session: &Session, text: &str) -> Result<NCPoly, Failure> {
    parse::parse(text, &session.coefficients).map_err(Failure::parse)
}

fn write_reports(out: &mut dyn Write, reports: &[CheckReport], json: bool) -> Result<i32, Failure> {
    if json {
        let text = match reports {
            [one] => serde_json::to_string_pretty(one),
            many => serde_json::to_string_pretty(many),
        }
        .expect("reports serialize");
        writeln!(out, "{text}").map_err(Failure::usage)?;
    } else {
        for r in reports {
            writeln!(
                out,
                "{}: {} lhs={:.6e} rhs={:.6e} margin={:.6e} representation={}",
                r.check_name,
                if r.pass { "PASS" } else { "FAIL" },
                r.lhs,
                r.rhs,
                r.margin,
                r.representation_used
            )
            .map_err(Failure::usage)?;
        }
    }
    Ok(if reports.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_CHECK })
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let session = match &cli.model {
        Some(path) => load_session(path, cli.tolerance)?,
        None => default_session(cli.tolerance),
    };
    let model = &session.model;
    match cli.command {
        Command::Fdq { poly, canonical } => {
            let dp = fdq(&parse_poly(&session, &poly)?);
            let text = match print::symbolic_tensor(&dp) {
                Some(s) if !canonical => s,
                _ => print::canonical_tensor(dp.canonical()?),
            };
            writeln!(out, "{text}").map_err(Failure::usage)?;
            Ok(EXIT_OK)
        }
        Command::PrintCanonical { poly } => {
            let p = parse_poly(&session, &poly)?;
            writeln!(out, "{}", print::canonical_poly(p.canonical()?)).map_err(Failure::usage)?;
            Ok(EXIT_OK)
        }
        Command::CheckIdentity { poly, json } => {
            let p = parse_poly(&session, &poly)?;
            write_reports(out, &[verifier::check_telescoping(&p, model)?], json)
        }
        Command::CheckPoincare { poly, variant, json } => {
            let p = parse_poly(&session, &poly)?;
            write_reports(out, &[verifier::check_poincare(&p, model, variant)?], json)
        }
        Command::CheckLemma4 { poly, radius, json } => {
            let p = parse_poly(&session, &poly)?;
            let radius = radius.unwrap_or(session.suite.r_factor * op_norm(model.x()));
            let reports = verifier::check_lemma4_bounds(&p, radius, model, Representation::Stored)?;
            write_reports(out, &reports, json)
        }
        Command::Suite { trials, seed, report } => {
            let mut config = session.suite.clone();
            if let Some(t) = trials {
                config.trials = t;
            }
            if let Some(s) = seed {
                config.seed = s;
            }
            let result = verifier::run_suite(&config)?;
            let json = result.to_json();
            match report {
                Some(path) => {
                    std::fs::write(&path, json)
                        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
                    let s = &result.summary;
                    writeln!(
                        out,
                        "suite: {} trials, {} checks, {} failures, {} errors; report written to {}",
                        s.trials,
                        s.checks,
                        s.failures,
                        s.errors,
                        path.display()
                    )
                    .map_err(Failure::usage)?;
                }
                None => out.write_all(json.as_bytes()).map_err(Failure::usage)?,
            }
            Ok(if result.summary.all_pass { EXIT_OK } else { EXIT_CHECK })
        }
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv: Vec<&str> = std::iter::once("ncpoincare").chain(args.iter().copied()).collect();
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn fdq_without_model_prints_names() {
        let (code, out, _) = run_str(&["fdq", "--poly", "b0*X*b1*X*b2"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out.trim(), "b0 ⊗ b1*X*b2 + b0*X*b1 ⊗ b2");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_str(&["fdq"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["fdq", "--poly", "2X"]).0, EXIT_PARSE);
        assert_eq!(run_str(&["fdq", "--poly", "X", "--model", "/nonexistent/model.json"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["check-poincare", "--poly", "X", "--variant", "sup"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn checks_pass_on_the_default_model() {
        for cmd in ["check-identity", "check-poincare", "check-lemma4"] {
            let (code, out, err) = run_str(&[cmd, "--poly", "b0*X*b1 + X^3 - 2*b2"]);
            assert_eq!(code, EXIT_OK, "{cmd}: {out}{err}");
            assert!(out.contains("PASS") && !out.contains("FAIL"));
        }
        let (code, out, _) = run_str(&["check-poincare", "--poly", "X", "--variant", "op", "--json"]);
        assert_eq!(code, EXIT_OK);
        let r: CheckReport = serde_json::from_str(&out).unwrap();
        assert!(r.pass && r.margin >= 0.0);
    }

    #[test]
    fn lemma4_radius_must_exceed_the_norm() {
        assert_eq!(run_str(&["check-lemma4", "--poly", "X", "--R", "0.5"]).0, EXIT_USAGE);
    }

    #[test]
    fn print_canonical_round_trips() {
        let (code, out, _) = run_str(&["print-canonical", "--poly", "b0*X - X*b0"]);
        assert_eq!(code, EXIT_OK);
        let again = run_str(&["print-canonical", "--poly", out.trim()]);
        assert_eq!(again.0, EXIT_OK);
    }
}
