use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use powerq::phase_estimation::InitialMode;
use powerq::PotentialSpec;

#[derive(Debug, Parser)]
#[command(name = "powerq", version, about = "Power-query eigenvalue estimation simulator")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Build the discretized operator, or run a discretization error study.
    Discretize(DiscretizeArgs),
    /// Eigenvalues (and optionally eigenvectors) of the discretized operator.
    Eigensolve(EigensolveArgs),
    /// Run phase estimation and report the outcome distribution.
    PhaseEstimate(PhaseEstimateArgs),
    /// Worst-case error over a grid of constant potentials, per query count.
    ErrorSweep(ErrorSweepArgs),
    /// Frequency sets of a power sequence, optionally with coefficient dumps.
    FreqAudit(FreqAuditArgs),
    /// Audit the Fourier/gap argument of the query lower bound.
    LowerboundAudit(LowerboundArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Discretize(_) => "discretize",
            Command::Eigensolve(_) => "eigensolve",
            Command::PhaseEstimate(_) => "phase-estimate",
            Command::ErrorSweep(_) => "error-sweep",
            Command::FreqAudit(_) => "freq-audit",
            Command::LowerboundAudit(_) => "lowerbound-audit",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Discretize(a) => &a.common,
            Command::Eigensolve(a) => &a.common,
            Command::PhaseEstimate(a) => &a.common,
            Command::ErrorSweep(a) => &a.common,
            Command::FreqAudit(a) => &a.common,
            Command::LowerboundAudit(a) => &a.common,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Output format; each subcommand has its own default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Print wall-clock timings to stderr.
    #[arg(long)]
    #[serde(skip)]
    pub timings: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct PotentialArgs {
    /// Potential: const:V, poly:C0,C1,..., or samples:V1,...,Vn.
    #[arg(long, value_parser = parse_potential, conflicts_with = "q_file")]
    #[serde(serialize_with = "display_opt")]
    pub q: Option<PotentialSpec>,
    /// CSV file with one potential sample per grid point.
    #[arg(long)]
    pub q_file: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DiscretizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub potential: PotentialArgs,
    /// Number of interior grid points.
    #[arg(long, conflicts_with = "n_list")]
    pub n: Option<usize>,
    /// Ascending grid sizes for an error study (constant potential only).
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Closed form for constant potentials, bisection otherwise.
    Auto,
    ClosedForm,
    Bisection,
}

#[derive(Debug, Args, Serialize)]
pub struct EigensolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub potential: PotentialArgs,
    #[arg(long)]
    pub n: usize,
    /// Residual tolerance relative to (n+1)^2.
    #[arg(long, default_value_t = powerq::eigen::DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    pub method: Method,
    /// Include eigenvectors in the report.
    #[arg(long)]
    pub vectors: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct PhaseEstimateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub potential: PotentialArgs,
    #[arg(long)]
    pub n: usize,
    /// Control qubits, equal to the number of power queries.
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t: usize,
    /// Accuracy for the success probability.
    #[arg(long)]
    pub epsilon: f64,
    /// Initial target state: exact or perturbed:OVERLAP.
    #[arg(long, default_value = "exact", value_parser = parse_mode)]
    #[serde(serialize_with = "display")]
    pub mode: InitialMode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of simulated measurements to draw.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Write the final state as JSON to this path.
    #[arg(long)]
    pub dump_state: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TRange {
    pub first: usize,
    pub last: usize,
}

impl fmt::Display for TRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.first, self.last)
    }
}

impl FromStr for TRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or("expected FIRST:LAST")?;
        let first = a.parse().map_err(|_| format!("bad T {a:?}"))?;
        let last = b.parse().map_err(|_| format!("bad T {b:?}"))?;
        if first == 0 || first > last {
            return Err(format!("need 1 <= FIRST <= LAST, got {s}"));
        }
        Ok(TRange { first, last })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ErrorSweepArgs {
    /// Range of query counts FIRST:LAST.
    #[arg(long = "T-range", default_value = "4:12")]
    #[serde(rename = "T_range", serialize_with = "display")]
    pub t_range: TRange,
    /// Number of cell midpoints in the constant-potential grid.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Required success probability.
    #[arg(long, default_value_t = powerq::phase_estimation::SUCCESS_THRESHOLD)]
    pub threshold: f64,
    /// Instead of the sweep, report the smallest T reaching each accuracy.
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct FreqAuditArgs {
    /// Power sequence p_1,...,p_T in application order.
    #[arg(long, value_delimiter = ',', required_unless_present = "pe_t", conflicts_with = "pe_t")]
    pub powers: Option<Vec<u64>>,
    /// Use the phase-estimation schedule with this many queries.
    #[arg(long = "pe-T")]
    #[serde(rename = "pe_T")]
    pub pe_t: Option<usize>,
    /// Target dimension for the coefficient dump.
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Initial target state for the coefficient dump.
    #[arg(long, default_value = "exact", value_parser = parse_mode)]
    #[serde(serialize_with = "display")]
    pub mode: InitialMode,
    /// Write the symbolic coefficients (CSV k,s,m,re,im) here; needs --pe-T.
    #[arg(long, requires = "pe_t")]
    pub coefficients: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonArg {
    /// One phase-grid step, `4 pi / 2^T`.
    Auto,
    Value(f64),
}

impl fmt::Display for EpsilonArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsilonArg::Auto => write!(f, "auto"),
            EpsilonArg::Value(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for EpsilonArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(EpsilonArg::Auto);
        }
        s.parse().map(EpsilonArg::Value).map_err(|_| format!("expected a number or auto, got {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenMapArg {
    Discrete,
    Continuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderArg {
    Binary,
    Shuffled(u64),
}

impl fmt::Display for DecoderArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecoderArg::Binary => write!(f, "binary"),
            DecoderArg::Shuffled(seed) => write!(f, "shuffled:{seed}"),
        }
    }
}

impl FromStr for DecoderArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "binary" {
            return Ok(DecoderArg::Binary);
        }
        s.strip_prefix("shuffled:")
            .and_then(|v| v.parse().ok())
            .map(DecoderArg::Shuffled)
            .ok_or_else(|| format!("expected binary or shuffled:SEED, got {s:?}"))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct LowerboundArgs {
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t: usize,
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    /// Accuracy, or auto for one phase-grid step.
    #[arg(long, default_value = "auto")]
    #[serde(serialize_with = "display")]
    pub epsilon: EpsilonArg,
    /// Eigenvalue each grid input must be answered with.
    #[arg(long, value_enum, default_value_t = EigenMapArg::Discrete)]
    pub eigen_map: EigenMapArg,
    /// Outcome-to-answer map: binary or shuffled:SEED.
    #[arg(long, default_value = "binary")]
    #[serde(serialize_with = "display")]
    pub decoder: DecoderArg,
    /// Write the audit record here (same as --output).
    #[arg(long, conflicts_with = "output")]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

fn parse_potential(s: &str) -> Result<PotentialSpec, String> {
    s.parse().map_err(|e: powerq::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<InitialMode, String> {
    s.parse().map_err(|e: powerq::Error| e.to_string())
}

fn display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn display_opt<T: std::fmt::Display, S: serde::Serializer>(v: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}
