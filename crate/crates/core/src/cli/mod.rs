//! The `theta4` command line.
//!
//! Exit codes are shared by every subcommand: 0 pass, 1 mathematical failure,
//! 2 invalid input, 3 warning (near-degenerate input).

pub mod corpus;
pub mod json;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::basis_analysis::{self, NumericalRankPolicy, ReportStatus};
use crate::char2::{self, Characteristic};
use crate::error::{Error, Result};
use crate::identities;
use crate::mmatrix;
use crate::theta_eval::{self, PeriodMatrix, Point, TruncationPolicy};

pub use corpus::{run_suite, CorpusSpec, Outcome, RunOptions, RunReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    MathFailure = 1,
    InputError = 2,
    Warn = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Parser)]
#[command(name = "theta4", version, about = "Theta functions of order four")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List all characteristics of a genus with their parity.
    Chars {
        #[arg(long)]
        genus: usize,
    },
    /// Build the sign matrix M over even pairs.
    Mmatrix {
        #[arg(long)]
        genus: usize,
        /// Check the row-sum and inverse identities exactly; exit 1 if any fails.
        #[arg(long)]
        verify: bool,
        /// Write {"g", "dim", "entries"} to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Evaluate one theta function with characteristic.
    Theta {
        #[arg(long)]
        tau: PathBuf,
        /// Characteristic as bit strings, e.g. "10,01".
        #[arg(long = "char")]
        characteristic: String,
        /// Point as "re,im;re,im;..." (defaults to the origin).
        #[arg(long)]
        z: Option<String>,
        #[arg(long, default_value_t = 1e-11)]
        eps: f64,
    },
    /// Even theta-nulls and the vanishing ones.
    Nulls {
        #[arg(long)]
        tau: PathBuf,
        #[arg(long, default_value_t = 1e-11)]
        eps: f64,
        #[arg(long, default_value_t = basis_analysis::DEFAULT_NULL_THRESHOLD)]
        null_threshold: f64,
    },
    /// Riemann's quartic relation at seeded points, all characteristics.
    VerifyQuartic(VerifyArgs),
    /// The inversion of the quartic relation, all even characteristics.
    VerifyInversion(VerifyArgs),
    /// Evaluation-matrix and fourth-power basis tests.
    BasisReport {
        #[arg(long)]
        tau: PathBuf,
        #[arg(long)]
        kappa0: Option<String>,
        #[arg(long, default_value_t = 1e-11)]
        eps: f64,
        #[arg(long, default_value_t = 1e-7)]
        sv_threshold: f64,
        #[arg(long, default_value_t = basis_analysis::DEFAULT_NULL_THRESHOLD)]
        null_threshold: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a corpus of period matrices and write a report.
    RunSuite {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Include wall-clock timings (makes the report non-reproducible).
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub tau: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Pass threshold on every relative residual.
    #[arg(long, default_value_t = 1e-8)]
    pub eps: f64,
    /// Truncation target for the theta series.
    #[arg(long, default_value_t = 1e-11)]
    pub trunc_eps: f64,
}

/// Parses `"re,im;re,im;..."`.
pub fn parse_point(s: &str) -> Result<Point> {
    let comps = s
        .split(';')
        .map(|part| {
            let (re, im) = part
                .split_once(',')
                .ok_or_else(|| Error::Input(format!("expected \"re,im\", got {part:?}")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Input(format!("bad number {x:?}: {e}")))
            };
            Ok(Complex64::new(parse(re)?, parse(im)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Point::new(comps)
}

fn load_tau(path: &std::path::Path) -> Result<PeriodMatrix> {
    json::read_json(path)
}

fn emit<T: Serialize + ?Sized>(out: &mut dyn Write, value: &T) -> Result<()> {
    out.write_all(json::to_canonical_string(value)?.as_bytes())?;
    Ok(())
}

/// Runs one parsed command, writing results to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Exit {
    match dispatch(cli.command, out) {
        Ok(exit) => exit,
        Err(e) => {
            eprintln!("theta4: {e}");
            Exit::InputError
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<Exit> {
    match command {
        Command::Chars { genus } => {
            let chars: Vec<_> = char2::enumerate_characteristics(genus)?
                .into_iter()
                .map(|c| {
                    json!({
                        "a1": c.a1_bits(),
                        "a2": c.a2_bits(),
                        "index": c.index(),
                        "parity": char2::parity(&c).value(),
                    })
                })
                .collect();
            emit(
                out,
                &json!({
                    "g": genus,
                    "d_plus": char2::even_count(genus),
                    "d_minus": char2::odd_count(genus),
                    "characteristics": chars,
                }),
            )?;
            Ok(Exit::Pass)
        }
        Command::Mmatrix {
            genus,
            verify,
            emit: emit_path,
        } => {
            let m = mmatrix::build_m(genus)?;
            let matrix = json!({"g": genus, "dim": m.dim(), "entries": m.rows()});
            if let Some(path) = &emit_path {
                json::write_atomic(path, &json::to_canonical_string(&matrix)?)?;
            }
            let mut exit = Exit::Pass;
            let mut shown = if emit_path.is_some() {
                json!({"g": genus, "dim": m.dim()})
            } else {
                matrix
            };
            if verify {
                let v = mmatrix::verify(genus)?;
                if !v.all_hold() {
                    exit = Exit::MathFailure;
                }
                shown["verification"] = serde_json::to_value(&v)?;
            }
            emit(out, &shown)?;
            Ok(exit)
        }
        Command::Theta {
            tau,
            characteristic,
            z,
            eps,
        } => {
            let tau = load_tau(&tau)?;
            let c: Characteristic = characteristic.parse()?;
            let z = match z {
                Some(s) => parse_point(&s)?,
                None => Point::zero(tau.genus()),
            };
            let v = theta_eval::theta_with_char(&c, &z, &tau, &TruncationPolicy::with_eps(eps)?)?;
            emit(
                out,
                &json!({
                    "characteristic": c,
                    "z": z,
                    "value": v.value,
                    "error_bound": v.error_bound,
                    "radius": v.radius,
                }),
            )?;
            Ok(Exit::Pass)
        }
        Command::Nulls {
            tau,
            eps,
            null_threshold,
        } => {
            let tau = load_tau(&tau)?;
            let scan = basis_analysis::scan_nulls(
                &tau,
                &TruncationPolicy::with_eps(eps)?,
                null_threshold,
            )?;
            let nulls: Vec<_> = scan
                .nulls
                .iter()
                .map(|(c, v)| {
                    json!({
                        "characteristic": c,
                        "value": v,
                        "relative_modulus": v.norm() / scan.max_modulus,
                    })
                })
                .collect();
            emit(
                out,
                &json!({
                    "g": tau.genus(),
                    "null_threshold": null_threshold,
                    "nulls": nulls,
                    "vanishing": scan.vanishing,
                    "near_vanishing": scan.near_vanishing,
                }),
            )?;
            Ok(if scan.near_vanishing.is_empty() {
                Exit::Pass
            } else {
                Exit::Warn
            })
        }
        Command::VerifyQuartic(args) => verify_identity(args, out, identities::verify_quartic),
        Command::VerifyInversion(args) => verify_identity(args, out, identities::verify_inversion),
        Command::BasisReport {
            tau,
            kappa0,
            eps,
            sv_threshold,
            null_threshold,
            seed,
            out: out_path,
        } => {
            let tau = load_tau(&tau)?;
            let kappa0 = match kappa0 {
                Some(s) => s.parse()?,
                None => Characteristic::zero(tau.genus())?,
            };
            let report = basis_analysis::basis_report(
                &tau,
                &kappa0,
                &TruncationPolicy::with_eps(eps)?,
                &NumericalRankPolicy::new(sv_threshold)?,
                null_threshold,
                seed,
            )?;
            let text = json::to_canonical_string(&report)?;
            json::write_atomic(&out_path, &text)?;
            emit(
                out,
                &json!({
                    "status": report.status,
                    "theorem11_verdict": report.theorem11_verdict,
                    "theorem12_verdict": report.theorem12_verdict,
                    "vanishing_nulls": report.vanishing_nulls,
                }),
            )?;
            Ok(match report.status {
                ReportStatus::Consistent => Exit::Pass,
                ReportStatus::Inconsistent => Exit::MathFailure,
                ReportStatus::Warn => Exit::Warn,
            })
        }
        Command::RunSuite {
            corpus,
            out: out_path,
            timings,
        } => {
            let (spec, base) = CorpusSpec::load(&corpus)?;
            let report = run_suite(&spec, &base, RunOptions { timings })?;
            json::write_atomic(&out_path, &json::to_canonical_string(&report)?)?;
            emit(
                out,
                &json!({"rollup": report.rollup, "counts": report.counts}),
            )?;
            Ok(match report.rollup {
                Outcome::Pass => Exit::Pass,
                Outcome::Fail => Exit::MathFailure,
                Outcome::Warn => Exit::Warn,
            })
        }
    }
}

type IdentityRunner =
    fn(&PeriodMatrix, usize, u64, &TruncationPolicy) -> Result<Vec<identities::IdentityResidual>>;

fn verify_identity(args: VerifyArgs, out: &mut dyn Write, runner: IdentityRunner) -> Result<Exit> {
    let tau = load_tau(&args.tau)?;
    if !(args.eps > 0.0) {
        return Err(Error::InvalidPolicy("--eps must be positive".into()));
    }
    let records = runner(
        &tau,
        args.samples,
        args.seed,
        &TruncationPolicy::with_eps(args.trunc_eps)?,
    )?;
    emit(out, &records)?;
    Ok(if records.iter().all(|r| r.rel_residual < args.eps) {
        Exit::Pass
    } else {
        Exit::MathFailure
    })
}
