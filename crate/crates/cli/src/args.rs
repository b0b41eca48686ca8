use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "majorant", version, about = "Lp norms of sparse trigonometric sums and the majorant problem")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Print results as JSON
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,

    /// Print results as CSV
    #[arg(long, global = true)]
    pub csv: bool,

    /// Worker thread cap (results do not depend on it)
    #[arg(long, global = true, env = "MAJORANT_THREADS")]
    pub threads: Option<usize>,

    /// Seed for randomized procedures
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Write the run manifest to this file
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    /// Directory for run manifests when --manifest is not given
    #[arg(long, global = true, default_value = "runs")]
    pub manifest_dir: PathBuf,
}

impl GlobalArgs {
    pub fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else if self.csv {
            Format::Csv
        } else {
            Format::Table
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Lp norm of a trigonometric polynomial
    Norm(NormArgs),
    /// Build the digit-product sets and compare ‖f‖_p with ‖F‖_p
    Construct(ConstructArgs),
    /// Search for coefficients maximizing ‖f‖_p / ‖F‖_p on a frequency set
    Search(SearchArgs),
    /// Step-function sandwich for the self-similar integral
    Lemma(LemmaArgs),
    /// Check the interpolation chain behind the upper bound
    Bounds(BoundsArgs),
    /// Summarize (and optionally replay) run manifests
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
#[group(id = "poly_source", required = true, multiple = false)]
pub struct PolySource {
    /// Inline polynomial, e.g. 0:1,1:1,3:-1 (freq:re[:im], comma-separated)
    #[arg(long, group = "poly_source", allow_hyphen_values = true)]
    pub poly: Option<String>,

    /// JSON file with [[freq, re, im], ...]
    #[arg(long, group = "poly_source")]
    pub poly_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct NormArgs {
    #[command(flatten)]
    pub source: PolySource,

    #[arg(long)]
    pub p: f64,

    /// Relative tolerance for quadrature
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,

    /// Use quadrature even when p is an even integer
    #[arg(long)]
    pub force_quadrature: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ConstructArgs {
    /// Base (at least 4)
    #[arg(long = "D")]
    pub base: u64,

    /// Number of digits
    #[arg(long, required_unless_present = "target_n", conflicts_with = "target_n")]
    pub k: Option<u32>,

    /// Choose the largest k with D^k <= N
    #[arg(long = "target-n")]
    pub target_n: Option<u64>,

    #[arg(long, default_value_t = 3.0)]
    pub p: f64,

    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// All ±1 patterns
    Signs,
    /// All q-th root of unity patterns
    Roots,
    /// Coordinate ascent over phases
    Ascent,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Frequency set, e.g. 0,1,3
    #[arg(long, required_unless_present = "digit_set", conflicts_with = "digit_set", allow_hyphen_values = true)]
    pub lambda: Option<String>,

    /// Use the digit-product set for D,k; ascent also starts from its digit signs
    #[arg(long)]
    pub digit_set: Option<String>,

    #[arg(long, default_value_t = 3.0)]
    pub p: f64,

    #[arg(long, value_enum, default_value_t = MethodArg::Signs)]
    pub method: MethodArg,

    /// Order of the roots of unity for --method roots
    #[arg(long, default_value_t = 4)]
    pub q: u32,

    /// Largest number of patterns an exhaustive search may visit
    #[arg(long, default_value_t = majorant_core::search::DEFAULT_BUDGET)]
    pub budget: u64,

    /// Random starts for --method ascent
    #[arg(long, default_value_t = 8)]
    pub restarts: u32,

    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct LemmaArgs {
    #[command(flatten)]
    pub source: PolySource,

    #[arg(long, default_value_t = 3.0)]
    pub alpha: f64,

    /// Number of cells
    #[arg(long = "D")]
    pub cells: usize,

    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,

    #[arg(long, default_value_t = 1)]
    pub k: u32,

    /// Require every cell to be delta-thin, failing with the needed D otherwise
    #[arg(long, conflicts_with = "best_effort")]
    pub strict: bool,

    /// Sampled, uncertified envelopes (allows alpha < 1)
    #[arg(long)]
    pub best_effort: bool,

    /// Samples per cell for --best-effort
    #[arg(long, default_value_t = 64)]
    pub samples: u64,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    /// Instance as an inline polynomial (coefficients of modulus at most 1)
    #[arg(long, conflicts_with_all = ["lambda", "random"], allow_hyphen_values = true)]
    pub poly: Option<String>,

    /// Instance with all coefficients equal to 1
    #[arg(long, conflicts_with = "random", allow_hyphen_values = true)]
    pub lambda: Option<String>,

    /// Check this many random instances instead
    #[arg(long)]
    pub random: Option<usize>,

    /// Largest frequency for --random
    #[arg(long, default_value_t = 64)]
    pub n_max: i64,

    /// Largest set size for --random
    #[arg(long, default_value_t = 16)]
    pub max_size: usize,

    /// Range parameter N (defaults to the largest frequency)
    #[arg(long = "n")]
    pub n: Option<i64>,

    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Manifest files
    #[arg(required = true)]
    pub manifests: Vec<PathBuf>,

    /// Rerun every manifest and compare with the recorded results
    #[arg(long)]
    pub verify: bool,
}
