//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parameter
//! error, 3 I/O error.

mod sweep;
mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::maximizer::{maximize, maximize_both, MaximizationResult, OptimizerConfig};
use crate::states::{gghz_alpha_from_tangle, ms_alpha_from_tangle, Family, FamilyParameter};
use crate::svetlichny::{nu, violation_report, Variant};

pub use sweep::{read_csv, run_sweep, write_csv, GridAxis, SweepRow, SweepSpec};
pub use verify::{run_checks, CheckOutcome, VerifyContext, VerifyLevel, NU_CHECK};

/// Environment variable naming the worker thread count.
pub const THREADS_ENV: &str = "SVETLICHNY_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "svetlichny",
    version,
    about = "Svetlichny-inequality maxima for GGHZ and maximal-slice states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the analytic bound report for one state as JSON.
    Bound(PointArgs),
    /// Write a grid of bound reports as CSV or JSON.
    Sweep(SweepArgs),
    /// Numerically maximize |<S_N>| and print the optimum as JSON.
    Optimize(OptimizeArgs),
    /// Run the built-in certification checks.
    Verify(VerifyArgs),
    /// Print nu+ and nu- for Hamming weights 0..15 as CSV.
    NuTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gghz,
    Ms,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Gghz => Family::Gghz,
            FamilyArg::Ms => Family::Ms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantPolicy {
    Plus,
    Minus,
    Both,
}

impl VariantPolicy {
    pub fn name(self) -> &'static str {
        match self {
            VariantPolicy::Plus => "plus",
            VariantPolicy::Minus => "minus",
            VariantPolicy::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long = "n")]
    pub n: usize,
    /// State angle in radians.
    #[arg(
        long,
        conflicts_with = "tau",
        required_unless_present = "tau",
        allow_negative_numbers = true
    )]
    pub alpha: Option<f64>,
    /// n-tangle; converted to the angle on the branch alpha in [0, pi/4] (GGHZ).
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
}

impl PointArgs {
    fn family_parameter(&self) -> Result<FamilyParameter, Error> {
        let family = Family::from(self.family);
        let alpha = match (self.alpha, self.tau) {
            (Some(a), _) => a,
            (None, Some(t)) => match family {
                Family::Gghz => gghz_alpha_from_tangle(t)?,
                Family::Ms => ms_alpha_from_tangle(self.n, t)?,
            },
            (None, None) => return Err(Error::invalid("one of --alpha or --tau is required")),
        };
        FamilyParameter::new(family, self.n, alpha)
    }
}

#[derive(Debug, Args)]
pub struct OptimizerArgs {
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub max_iterations: usize,
}

impl OptimizerArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            max_iterations: self.max_iterations,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, value_enum, default_value_t = VariantPolicy::Both)]
    pub variant: VariantPolicy,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Smallest (or only) number of qubits.
    #[arg(long = "n")]
    pub n: usize,
    /// Largest number of qubits; defaults to --n.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, conflicts_with_all = ["tau_start", "tau_stop"])]
    pub alpha_start: Option<f64>,
    #[arg(long, conflicts_with_all = ["tau_start", "tau_stop"])]
    pub alpha_stop: Option<f64>,
    #[arg(long)]
    pub tau_start: Option<f64>,
    #[arg(long)]
    pub tau_stop: Option<f64>,
    /// Grid points per N (at least 2).
    #[arg(long, default_value_t = 25)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = VariantPolicy::Both)]
    pub variant: VariantPolicy,
    /// Run the numerical maximizer at every grid point.
    #[arg(long)]
    pub optimize: bool,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = VerifyLevel::Quick)]
    pub level: VerifyLevel,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Bound(a) => cmd_bound(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, err),
        Command::Optimize(a) => cmd_optimize(&a, out),
        Command::NuTable => cmd_nu_table(out),
        Command::Verify(a) => return run_verify(&VerifyContext::new(a.level), out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(err, "I/O error: {msg}");
            EXIT_IO
        }
    }
}

fn io_failure(e: impl std::fmt::Display) -> Failure {
    Failure::Io(e.to_string())
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io_failure)?;
    writeln!(out).map_err(io_failure)
}

fn cmd_bound(args: &PointArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let family = args.family_parameter()?;
    let report = violation_report(&family)?;
    write_json(out, &report)
}

/// Rounds to 12 significant digits for display.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Debug, Serialize)]
struct SettingJson {
    theta0: f64,
    phi0: f64,
    theta1: f64,
    phi1: f64,
}

#[derive(Debug, Serialize)]
struct OptimizeJson {
    family: FamilyParameter,
    analytic_max: f64,
    best_value: f64,
    best_settings: Vec<SettingJson>,
    variant: Variant,
    restarts_converged: usize,
    stationarity_residual: f64,
}

pub(crate) fn run_optimizer(
    family: &FamilyParameter,
    policy: VariantPolicy,
    config: &OptimizerConfig,
) -> Result<MaximizationResult, Error> {
    let state = family.state()?;
    match policy {
        VariantPolicy::Plus => maximize(&state, Variant::Plus, config),
        VariantPolicy::Minus => maximize(&state, Variant::Minus, config),
        VariantPolicy::Both => maximize_both(&state, config),
    }
}

fn cmd_optimize(args: &OptimizeArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let family = args.point.family_parameter()?;
    let report = violation_report(&family)?;
    let result = run_optimizer(&family, args.variant, &args.optimizer.config())?;
    let best_settings = result
        .best_settings
        .pairs()
        .iter()
        .map(|[a, b]| SettingJson {
            theta0: round_sig12(a.theta()),
            phi0: round_sig12(a.phi()),
            theta1: round_sig12(b.theta()),
            phi1: round_sig12(b.phi()),
        })
        .collect();
    write_json(
        out,
        &OptimizeJson {
            family,
            analytic_max: report.analytic_max,
            best_value: result.best_value,
            best_settings,
            variant: result.best_variant,
            restarts_converged: result.restarts_converged,
            stationarity_residual: result.stationarity_residual,
        },
    )
}

fn cmd_sweep(args: &SweepArgs, err: &mut dyn Write) -> Result<(), Failure> {
    let spec = SweepSpec::from_args(args)?;
    let rows = run_sweep(&spec)?;
    let file = std::fs::File::create(&spec.out)
        .map_err(|e| Failure::Io(format!("{}: {e}", spec.out.display())))?;
    let mut writer = std::io::BufWriter::new(file);
    match spec.format {
        OutputFormat::Csv => sweep::write_csv(&mut writer, &rows).map_err(io_failure)?,
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut writer, &rows).map_err(io_failure)?;
            writeln!(writer).map_err(io_failure)?;
        }
    }
    writer.flush().map_err(io_failure)?;
    let _ = writeln!(err, "wrote {} rows to {}", rows.len(), spec.out.display());
    Ok(())
}

fn cmd_nu_table(out: &mut dyn Write) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["w", "nu_plus", "nu_minus"])
        .map_err(io_failure)?;
    for weight in 0..16u32 {
        w.write_record([
            weight.to_string(),
            nu(weight, Variant::Plus).to_string(),
            nu(weight, Variant::Minus).to_string(),
        ])
        .map_err(io_failure)?;
    }
    w.flush().map_err(io_failure)
}

/// Runs the checks in `ctx`, prints one line per check and returns the exit
/// code.
pub fn run_verify(ctx: &VerifyContext, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let outcomes = run_checks(ctx);
    let mut failed = 0;
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "[{status}] {} ({:.2}s): {}",
            o.name, o.seconds, o.detail
        );
        if !o.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        let names: Vec<&str> = outcomes
            .iter()
            .filter(|o| !o.passed)
            .map(|o| o.name)
            .collect();
        let _ = writeln!(
            err,
            "{failed} of {} checks failed: {}",
            outcomes.len(),
            names.join(", ")
        );
        EXIT_VERIFY
    } else {
        let _ = writeln!(out, "all {} checks passed", outcomes.len());
        EXIT_OK
    }
}
