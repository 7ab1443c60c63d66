use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Robust chaotic tent map bit generator and analysis toolkit.
#[derive(Debug, Parser)]
#[command(name = "rctm", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a thresholded bitstream from a key.
    Generate(GenerateArgs),
    /// Bifurcation, Lyapunov and phase-coverage datasets over a parameter grid.
    #[command(subcommand)]
    AnalyzeDynamics(DynamicsCommand),
    /// Run the NIST SP 800-22 subset over disjoint stream segments.
    TestNist(NistArgs),
    /// Run the ENT byte statistics.
    TestEnt(EntArgs),
    /// Key-perturbation and distribution sweeps.
    #[command(subcommand)]
    Sweep(SweepCommand),
    /// Key-space size at a given floating-point precision.
    Keyspace(KeyspaceArgs),
    /// Write a trajectory dataset from a key, or re-encode a bitstream file.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Raw,
    AsciiBits,
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Raw => "raw",
            Format::AsciiBits => "ascii-bits",
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Encodings accepted for bitstream input files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Raw,
    AsciiBits,
}

#[derive(Debug, Clone, Args)]
pub struct KeyArgs {
    /// Map parameter, non-integer in (2,100).
    #[arg(long, allow_hyphen_values = true)]
    pub mu: f64,
    /// Seed in (0,1).
    #[arg(long, allow_hyphen_values = true)]
    pub x0: f64,
    /// Iterations discarded before output.
    #[arg(long, default_value_t = 0)]
    pub burn_in: usize,
}

/// A key, or a bitstream file when `--input` is given.
#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    #[arg(long, allow_hyphen_values = true, required_unless_present = "input")]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "input")]
    pub x0: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub burn_in: usize,
    /// Read the stream from this file instead of generating it.
    #[arg(long, conflicts_with_all = ["mu", "x0"])]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = InputFormat::Raw)]
    pub input_format: InputFormat,
    /// Number of bits to read from a raw input (default: all).
    #[arg(long)]
    pub input_bits: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub key: KeyArgs,
    /// Number of bits to generate.
    #[arg(long)]
    pub bits: usize,
    #[arg(long, value_enum, default_value_t = Format::Raw)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
    /// Also write run metadata as JSON to this path.
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Classic,
    Robust,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, value_enum, default_value_t = Kind::Robust)]
    pub map: Kind,
    /// Lower grid bound (default 0 for classic, 2 for robust).
    #[arg(long, allow_hyphen_values = true)]
    pub mu_min: Option<f64>,
    /// Upper grid bound (default 2 for classic, 100 for robust).
    #[arg(long, allow_hyphen_values = true)]
    pub mu_max: Option<f64>,
    /// Grid points, placed at cell midpoints.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.23)]
    pub x0: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum DynamicsCommand {
    /// Settled orbit samples for every grid point.
    Bifurcation {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = rctm::dynamics::DEFAULT_SETTLE)]
        settle: usize,
        #[arg(long, default_value_t = rctm::dynamics::DEFAULT_KEEP)]
        keep: usize,
    },
    /// Lyapunov exponent for every grid point.
    Lyapunov {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        burn_in: usize,
    },
    /// Fraction of phase-space cells visited for every grid point.
    Coverage {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        bins: usize,
    },
}

#[derive(Debug, Args)]
pub struct NistArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Number of disjoint segments to test.
    #[arg(long, default_value_t = 20)]
    pub streams: usize,
    /// Bits per segment.
    #[arg(long, default_value_t = 1_000_000)]
    pub stream_bits: usize,
    #[arg(long, default_value_t = 128)]
    pub block_m: usize,
    #[arg(long, default_value_t = 2)]
    pub apen_m: usize,
    #[arg(long, default_value_t = 2)]
    pub serial_m: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EntArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Bytes to generate from a key.
    #[arg(long, default_value_t = 1_000_000)]
    pub bytes: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VaryArg {
    Mu,
    X0,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// 2^-48, the default perturbation step.
pub const DEFAULT_DELTA: f64 = 3.552713678800501e-15;

#[derive(Debug, Subcommand)]
pub enum SweepCommand {
    /// Correlation, UACI and NPCR of base vs base + k*delta trajectories.
    Correlation {
        #[command(flatten)]
        key: KeyArgs,
        #[arg(long, value_enum, default_value_t = VaryArg::X0)]
        vary: VaryArg,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long, default_value_t = 1000)]
        len: usize,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Pairwise correlations of a few closely spaced keys.
    Sensitivity {
        #[command(flatten)]
        key: KeyArgs,
        #[arg(long, value_enum, default_value_t = VaryArg::Mu)]
        vary: VaryArg,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = 5)]
        sequences: usize,
        #[arg(long, default_value_t = 3000)]
        len: usize,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// 8-bit entropy of trajectories from neighbouring seeds.
    Entropy {
        #[command(flatten)]
        key: KeyArgs,
        #[arg(long, default_value_t = rctm::security::DEFAULT_ENTROPY_SEQUENCES)]
        sequences: usize,
        #[arg(long, default_value_t = rctm::security::DEFAULT_ENTROPY_LEN)]
        len: usize,
        #[arg(long, default_value_t = rctm::security::DEFAULT_SEED_STEP)]
        seed_step: f64,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Chi-square uniformity of quantized states.
    Histogram {
        #[command(flatten)]
        key: KeyArgs,
        #[arg(long, default_value_t = 100_000)]
        len: usize,
        #[arg(long, default_value_t = 256)]
        bins: usize,
        #[command(flatten)]
        report: ReportArgs,
    },
}

#[derive(Debug, Args)]
pub struct KeyspaceArgs {
    /// Decimal exponent of the working precision.
    #[arg(long, allow_hyphen_values = true, default_value_t = -16)]
    pub precision: i32,
    #[command(flatten)]
    pub report: ReportArgs,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Trajectory length when exporting from a key.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}
