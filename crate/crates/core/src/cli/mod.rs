//! The `wishart-dp` command line: `perturb`, `pca`, `audit`, `bench` and
//! `choose`.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 audit failure, 3
//! numerical failure.

mod ingest;
mod pca;

pub use ingest::{ingest, parse_points};
pub use pca::{run_pca, PcaSummary};

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::audit::{
    l1_sensitivity_bracket, nuclear_sensitivity_check, nuclear_sensitivity_grid,
    privacy_ratio_audit, tail_bound_audit, TailBoundParams, NUCLEAR_BOUND, NUCLEAR_TOLERANCE,
};
use crate::bench::{
    complexity_rows, low_rank_rows, noise_scaling_rows, subspace_rows, with_slopes, write_csv,
    Suite,
};
use crate::error::{Error, Result};
use crate::matrix::write_matrix_file;
use crate::mechanisms::{
    choose_mechanism, perturb, ChooserVerdict, CovarianceScaling, Mechanism, PrivacyBudget,
};
use crate::sampling::RngStream;
use crate::utility::CloseApproxParams;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_AUDIT_FAILURE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "wishart-dp",
    version,
    about = "Differentially private covariance release and audits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: RunConfig,
}

/// Parsed command line; serialized verbatim into every JSON artifact.
#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum RunConfig {
    /// Release a noisy covariance of a CSV dataset.
    Perturb(PerturbArgs),
    /// Top-k eigenvalues, components and projector of a matrix file.
    Pca(PcaArgs),
    /// Monte Carlo check of one privacy guarantee.
    Audit(AuditArgs),
    /// Parameter sweep written as CSV.
    Bench(BenchArgs),
    /// Pick Laplace or Wishart noise from the two sensitivities.
    Choose(ChooseArgs),
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct PerturbArgs {
    /// CSV, one point per row, optional header.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Mechanism::Wishart)]
    pub mechanism: Mechanism,
    #[arg(long)]
    pub epsilon: f64,
    /// Only the Gaussian baseline takes delta > 0.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = CovarianceScaling::Mean)]
    pub scaling: CovarianceScaling,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Released matrix, plain-text format.
    #[arg(long)]
    pub output: PathBuf,
    /// JSON report; stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Divide all points by the largest norm when it exceeds 1.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct PcaArgs {
    /// Symmetric matrix, plain-text format.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// Receives eigenvalues.txt, components.txt, projector.mat and pca.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Privacy,
    Nuclear,
    L1,
    Tail,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct AuditArgs {
    #[arg(long, value_enum)]
    pub check: Check,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Tail check: θ.
    #[arg(long, default_value_t = 5.0)]
    pub theta: f64,
    /// Tail check: degrees of freedom (default d + 1).
    #[arg(long)]
    pub dof: Option<f64>,
    /// Tail check: scale eigenvalue c.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// l1 check (and the d = 2 nuclear grid): angular grid step.
    #[arg(long, default_value_t = 0.01)]
    pub resolution: f64,
    /// JSON verdict; stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, value_delimiter = ',', required = true)]
    pub d_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub epsilon_list: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Complexity suite: ρ.
    #[arg(long, default_value_t = 0.75)]
    pub rho: f64,
    /// Complexity suite: η.
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Complexity suite: population eigengap.
    #[arg(long, default_value_t = 0.5)]
    pub gap: f64,
    /// CSV output; the config goes to `<out>.config.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ChooseArgs {
    #[arg(long)]
    pub d: usize,
    /// Fills in the PCA sensitivities 2d/n and 3/n when they are not given.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub max_l11: Option<f64>,
    #[arg(long)]
    pub max_nuclear: Option<f64>,
}

/// Wrapper written around every JSON result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub config: RunConfig,
    pub result: T,
}

impl<T> Envelope<T> {
    pub fn new(config: &RunConfig, result: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config: config.clone(),
            result,
        }
    }
}

/// Pretty JSON with a trailing newline, to `path` or stdout.
pub fn emit_report<T: Serialize>(report: &T, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditVerdict {
    pub check: Check,
    pub passed: bool,
    pub max_observed: f64,
    pub bound: f64,
    pub trials: usize,
    /// Support violations (privacy), exceedances (tail), else 0.
    pub flagged: usize,
    pub details: serde_json::Value,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(
            name,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn at_least_one(name: &'static str, v: usize) -> Result<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(Error::param(name, "must be at least 1"))
    }
}

impl RunConfig {
    /// Checks every numeric flag before anything is read or computed.
    pub fn validate(&self) -> Result<()> {
        match self {
            RunConfig::Perturb(a) => {
                PrivacyBudget::new(a.epsilon, a.delta)?;
            }
            RunConfig::Pca(a) => at_least_one("k", a.k)?,
            RunConfig::Audit(a) => {
                at_least_one("d", a.d)?;
                at_least_one("n", a.n)?;
                at_least_one("trials", a.trials)?;
                positive("epsilon", a.epsilon)?;
                positive("scale", a.scale)?;
                if !(a.theta >= 0.0 && a.theta.is_finite()) {
                    return Err(Error::param(
                        "theta",
                        format!("must be >= 0, got {}", a.theta),
                    ));
                }
                if !(a.resolution > 0.0 && a.resolution < 1.0) {
                    return Err(Error::param(
                        "resolution",
                        format!("must be in (0, 1), got {}", a.resolution),
                    ));
                }
            }
            RunConfig::Bench(a) => {
                for &d in &a.d_list {
                    at_least_one("d", d)?;
                }
                for &e in &a.epsilon_list {
                    positive("epsilon", e)?;
                }
                at_least_one("n", a.n)?;
                at_least_one("k", a.k)?;
                at_least_one("trials", a.trials)?;
                CloseApproxParams::new(a.rho, a.eta, a.gap)?;
            }
            RunConfig::Choose(a) => {
                at_least_one("d", a.d)?;
                if let Some(n) = a.n {
                    at_least_one("n", n)?;
                }
                if let Some(v) = a.max_l11 {
                    positive("max_l11", v)?;
                }
                if let Some(v) = a.max_nuclear {
                    positive("max_nuclear", v)?;
                }
            }
        }
        Ok(())
    }
}

/// Runs a parsed command. `Ok(false)` means an audit ran and failed.
pub fn run(config: &RunConfig) -> Result<bool> {
    config.validate()?;
    match config {
        RunConfig::Perturb(a) => run_perturb(config, a),
        RunConfig::Pca(a) => {
            run_pca(config, &a.input, a.k, &a.out_dir)?;
            Ok(true)
        }
        RunConfig::Audit(a) => run_audit(config, a),
        RunConfig::Bench(a) => run_bench(config, a),
        RunConfig::Choose(a) => run_choose(config, a),
    }
}

fn run_perturb(config: &RunConfig, a: &PerturbArgs) -> Result<bool> {
    let budget = PrivacyBudget::new(a.epsilon, a.delta)?;
    let x = ingest(&a.input, a.normalize)?;
    let mut rng = RngStream::new(a.seed, a.stream);
    let p = perturb(a.mechanism, &x, &budget, a.scaling, &mut rng)?;
    write_matrix_file(&a.output, &p.report.output)?;
    emit_report(&Envelope::new(config, &p.report), a.report.as_deref())?;
    Ok(true)
}

fn run_audit(config: &RunConfig, a: &AuditArgs) -> Result<bool> {
    let rng = RngStream::new(a.seed, a.stream);
    let verdict = match a.check {
        Check::Privacy => {
            let r = privacy_ratio_audit(a.trials, a.d, a.n, a.epsilon, &rng)?;
            AuditVerdict {
                check: a.check,
                passed: r.passed,
                max_observed: r.max_abs_log_ratio.max(r.max_von_neumann_bound),
                bound: r.bound,
                trials: r.trials,
                flagged: r.support_violations,
                details: serde_json::to_value(&r)?,
            }
        }
        Check::Nuclear => {
            let r = nuclear_sensitivity_check(a.trials, a.d, a.n, &rng)?;
            let grid = if a.d == 2 {
                Some(nuclear_sensitivity_grid(a.resolution)?)
            } else {
                None
            };
            let grid_ok = grid
                .as_ref()
                .is_none_or(|g| g.max_scaled_nuclear <= NUCLEAR_BOUND + NUCLEAR_TOLERANCE);
            AuditVerdict {
                check: a.check,
                passed: r.passed && grid_ok,
                max_observed: r.max_scaled_nuclear,
                bound: NUCLEAR_BOUND,
                trials: r.trials,
                flagged: 0,
                details: serde_json::json!({ "sampled": r, "grid": grid }),
            }
        }
        Check::L1 => {
            let r = l1_sensitivity_bracket(a.d, a.n, a.resolution)?;
            AuditVerdict {
                check: a.check,
                passed: r.within_bracket && r.construction_attains_lower,
                max_observed: r.estimate,
                bound: r.upper_bound,
                trials: r.evaluations,
                flagged: 0,
                details: serde_json::to_value(&r)?,
            }
        }
        Check::Tail => {
            let dof = a.dof.unwrap_or(a.d as f64 + 1.0);
            let params = TailBoundParams::isotropic(a.theta, a.d, dof, a.scale)?;
            let r = tail_bound_audit(params, a.trials, &rng)?;
            AuditVerdict {
                check: a.check,
                passed: r.passed,
                max_observed: r.frequency,
                bound: r.probability_bound + 3.0 * r.standard_error,
                trials: r.trials,
                flagged: r.exceedances,
                details: serde_json::to_value(&r)?,
            }
        }
    };
    emit_report(&Envelope::new(config, &verdict), a.report.as_deref())?;
    Ok(verdict.passed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub suite: Suite,
    pub rows: usize,
    pub csv: PathBuf,
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s: OsString = out.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

fn run_bench(config: &RunConfig, a: &BenchArgs) -> Result<bool> {
    let rng = RngStream::new(a.seed, a.stream);
    let mut buf = Vec::new();
    let rows = match a.suite {
        Suite::NoiseScaling => {
            let rows = with_slopes(noise_scaling_rows(
                &a.d_list,
                a.n,
                &a.epsilon_list,
                a.trials,
                &rng,
            )?);
            write_csv(&rows, &mut buf)?;
            rows.len()
        }
        Suite::Subspace => {
            let rows = subspace_rows(&a.d_list, a.n, a.k, &a.epsilon_list, a.trials, &rng)?;
            write_csv(&rows, &mut buf)?;
            rows.len()
        }
        Suite::Complexity => {
            let params = CloseApproxParams::new(a.rho, a.eta, a.gap)?;
            let rows = complexity_rows(&a.d_list, &a.epsilon_list, &params, a.trials, &rng)?;
            write_csv(&rows, &mut buf)?;
            rows.len()
        }
        Suite::Lowrank => {
            let rows = low_rank_rows(&a.d_list, a.n, a.k, &a.epsilon_list, a.trials, &rng)?;
            write_csv(&rows, &mut buf)?;
            rows.len()
        }
    };
    let mut f = BufWriter::new(File::create(&a.out)?);
    f.write_all(&buf)?;
    f.flush()?;
    let summary = BenchSummary {
        suite: a.suite,
        rows,
        csv: a.out.clone(),
    };
    emit_report(
        &Envelope::new(config, &summary),
        Some(&sidecar_path(&a.out)),
    )?;
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChooseResult {
    pub d: usize,
    pub max_l11: f64,
    pub max_nuclear: f64,
    pub verdict: ChooserVerdict,
}

fn run_choose(config: &RunConfig, a: &ChooseArgs) -> Result<bool> {
    let from_n = |what: &'static str, f: fn(usize, usize) -> f64| match a.n {
        Some(n) => Ok(f(a.d, n)),
        None => Err(Error::param(what, "give it explicitly or pass --n")),
    };
    let max_l11 = match a.max_l11 {
        Some(v) => v,
        None => from_n("max_l11", |d, n| 2.0 * d as f64 / n as f64)?,
    };
    let max_nuclear = match a.max_nuclear {
        Some(v) => v,
        None => from_n("max_nuclear", |_, n| 3.0 / n as f64)?,
    };
    let verdict = choose_mechanism(max_l11, max_nuclear, a.d)?;
    let result = ChooseResult {
        d: a.d,
        max_l11,
        max_nuclear,
        verdict,
    };
    emit_report(&Envelope::new(config, &result), None)?;
    Ok(true)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence { .. } => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code. Messages go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
        }
    };
    match run(&cli.command) {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("audit failed");
            EXIT_AUDIT_FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
