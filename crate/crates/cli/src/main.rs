//! `fermibox`: spectra, kernels, samplers and convergence studies from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 baseline failure.

mod commands;
mod figures;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fermibox_core::Error;
use serde::Serialize;
use serde_json::Value;

use output::Format;

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Parser)]
#[command(name = "fermibox", version, about = "Free fermions in a box and the classical compact groups")]
pub struct Cli {
    /// Seed of every random stream.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output rendering; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Lowest eigenvalues and eigenfunctions of a boundary condition.
    Spectrum(SpectrumArgs),
    /// Kernel evaluation.
    #[command(subcommand)]
    Kernel(KernelCommand),
    /// Chemical potential with a prescribed mean particle number.
    MuSolve(MuSolveArgs),
    /// Fugacity of the finite-temperature bulk limit.
    LambdaSolve(LambdaSolveArgs),
    /// Point configurations from the exact samplers.
    Sample(SampleArgs),
    /// Non-intersecting loop densities.
    #[command(subcommand)]
    Km(KmCommand),
    /// Scaling study against the committed baseline.
    Verify(VerifyArgs),
    /// Plot-ready data for the two reference figures.
    ReproduceFigure(FigureArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct BcArgs {
    /// Preset name or boundary-matrix JSON.
    #[arg(long, default_value = "dirichlet")]
    pub bc: String,
    /// Comma-separated preset parameters; accepts `pi`, `pi/2`, `2pi`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_real)]
    pub params: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false, id = "target")]
pub struct SpectrumTargetArgs {
    /// Number of lowest eigenvalues.
    #[arg(long)]
    pub count: Option<usize>,
    /// All eigenvalues up to this energy.
    #[arg(long, allow_hyphen_values = true)]
    pub emax: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub bc: BcArgs,
    #[command(flatten)]
    pub target: SpectrumTargetArgs,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelCommand {
    /// Evaluate a kernel on a tensor grid.
    Eval(KernelEvalArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct KernelEvalArgs {
    /// Kernel spec JSON, e.g. '{"Limit":{"Sine":{}}}'.
    #[arg(long)]
    pub spec: String,
    /// Grid "x0:x1:n,y0:y1:m".
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
}

#[derive(Debug, Args, Serialize)]
pub struct MuSolveArgs {
    #[command(flatten)]
    pub bc: BcArgs,
    /// Temperature.
    #[arg(long)]
    pub t: f64,
    /// Target mean particle number.
    #[arg(long)]
    pub target: f64,
    /// Tolerance on the particle number.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct LambdaSolveArgs {
    /// Scaling constant `T = cN²`.
    #[arg(long)]
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleKind {
    /// Projection DPP of the lowest modes, or of a group kernel with --group.
    Dpp,
    /// Grand-canonical ensemble at (T, μ).
    Gc,
    /// Haar unitary eigenangles.
    HaarU,
    /// Nontrivial Haar special orthogonal eigenangles.
    HaarSo,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub kind: SampleKind,
    #[command(flatten)]
    pub bc: BcArgs,
    /// Group kernel for `dpp`: U, Sp, SO_even, SO_odd.
    #[arg(long)]
    pub group: Option<String>,
    /// Particle number, group rank, or matrix size for Haar samplers.
    #[arg(long)]
    pub n: Option<usize>,
    /// Temperature for `gc`.
    #[arg(long)]
    pub t: Option<f64>,
    /// Chemical potential for `gc`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "target")]
    pub mu: Option<f64>,
    /// Mean particle number for `gc`; μ is solved for.
    #[arg(long)]
    pub target: Option<f64>,
    /// Number of configurations.
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KmCommand {
    /// Log-density of one configuration.
    Density(KmDensityArgs),
    /// Metropolis chain targeting the loop density.
    Mcmc(KmMcmcArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct KmDensityArgs {
    /// Loop family A, B, C or D.
    #[arg(long)]
    pub family: String,
    /// Loop time.
    #[arg(long)]
    pub t: f64,
    /// Comma-separated points.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true, value_parser = parse_real)]
    pub points: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct KmMcmcArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub t: f64,
    /// Number of loops.
    #[arg(long)]
    pub n: usize,
    /// Single-site moves; one state is recorded per sweep of n moves.
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Standard deviation of the Gaussian proposal.
    #[arg(long, default_value_t = 0.3)]
    pub step_size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    Bulk,
    Edge,
    FiniteT,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub study: Study,
    #[command(flatten)]
    pub bc: BcArgs,
    /// Limit kernel: JSON, or sine, bessel-plus, bessel-minus, robin-edge:c, delta-edge:c.
    #[arg(long)]
    pub limit: Option<String>,
    /// Comma-separated increasing sizes.
    #[arg(long, value_delimiter = ',', default_value = "25,50,100,200")]
    pub sizes: Vec<usize>,
    /// Bulk point.
    #[arg(long, default_value = "pi", value_parser = parse_real)]
    pub x0: f64,
    /// Edge: 0 or 2pi.
    #[arg(long, default_value = "0")]
    pub edge: String,
    /// Grid "x0:x1:n,y0:y1:m"; bulk [−2,2]², edge [0.1,2]², 33 points per axis by default.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Scaling constant for the finite-temperature study.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    #[value(name = "dirichlet_robin_density")]
    DirichletRobinDensity,
    #[value(name = "finite_t_two_point")]
    FiniteTTwoPoint,
}

#[derive(Debug, Args, Serialize)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub which: Figure,
    /// Grand-canonical samples behind the empirical two-point estimate.
    #[arg(long, default_value_t = 4000)]
    pub samples: usize,
}

/// Reals with `pi` shorthands: `pi`, `-pi/2`, `2pi`, `3*pi/4`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace('π', "pi").replace('*', "");
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, b.parse::<f64>().map_err(|_| format!("not a number: {s:?}"))?),
        None => (t.as_str(), 1.0),
    };
    let coef = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some("-") => -1.0,
        Some(c) => c.parse::<f64>().map_err(|_| format!("not a number: {s:?}"))?,
        None => return Err(format!("not a number: {s:?}")),
    };
    Ok(coef * std::f64::consts::PI / den)
}

/// Why a command failed; selects the exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
    /// The report was written; the study missed the baseline.
    Baseline(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Baseline(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Baseline(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::NonUnitary(_)
            | Error::OutsideDomain(_)
            | Error::InvalidConfig(_)
            | Error::MismatchedLimit(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

/// The resolved run configuration; everything that determines the output bytes.
fn run_config(cli: &Cli) -> Value {
    serde_json::json!({
        "command": cli.command,
        "seed": cli.seed,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot configure threads: {e}")))?;
    }
    let config = run_config(&cli);
    let (emit, verdict) = commands::dispatch(&cli)?;
    output::write(&output::render(&emit, &config, cli.format), &cli.out)?;
    match verdict {
        Some(msg) => Err(Failure::Baseline(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fermibox: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
