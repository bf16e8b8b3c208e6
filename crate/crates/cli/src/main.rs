use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

use output::CliError;

#[derive(Parser)]
#[command(name = "spacing-clust", version, about = "Spacing-based clustering with minimum group sizes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm and write labels and a report.
    Run(RunArgs),
    /// k-means against both constrained algorithms over several seeds.
    Compare(CompareArgs),
    /// Proportion of singleton groups in the single-linkage cut for a range of k.
    Singletons(SingletonArgs),
    /// Write the single-linkage merge sequence.
    Dendrogram(DendrogramArgs),
    /// Exhaustive checks on tiny instances.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args, Clone)]
pub struct InputArgs {
    /// Point CSV, one point per row.
    #[arg(long, value_name = "PATH", required_unless_present = "matrix", conflicts_with = "matrix")]
    pub input: Option<PathBuf>,
    /// Square distance-matrix CSV.
    #[arg(long, value_name = "PATH")]
    pub matrix: Option<PathBuf>,
    /// The first row is a header.
    #[arg(long)]
    pub header: bool,
    /// Ignore the last column of a point CSV.
    #[arg(long)]
    pub label_col: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    SingleLinkage,
    Minsp,
    Maxmst,
    MaxmstFast,
    Kmeans,
}

#[derive(Copy, Clone, PartialEq, Eq, Default, ValueEnum)]
pub enum SchedulerArg {
    #[default]
    Lpt,
    Exact,
}

#[derive(Copy, Clone, PartialEq, Eq, Default, ValueEnum)]
pub enum SearchArg {
    #[default]
    Binary,
    Linear,
}

#[derive(Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub algo: Algo,
    #[arg(long)]
    pub k: usize,
    /// Minimum group size; required by minsp and maxmst.
    #[arg(long = "L", value_name = "L")]
    pub min_size: Option<usize>,
    /// Size slack, as a decimal or a fraction such as 1/10.
    #[arg(long, default_value = "0")]
    pub epsilon: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t)]
    pub scheduler: SchedulerArg,
    #[arg(long, value_enum, default_value_t)]
    pub search: SearchArg,
    /// Logarithmic ℓ schedule for maxmst.
    #[arg(long)]
    pub fast: bool,
    /// Labels CSV (point, group).
    #[arg(long, value_name = "PATH")]
    pub out_labels: Option<PathBuf>,
    /// Report JSON; printed to standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out_report: Option<PathBuf>,
    /// Algorithm trace JSON (minsp and maxmst).
    #[arg(long, value_name = "PATH")]
    pub out_trace: Option<PathBuf>,
    /// Report runtime_s as null.
    #[arg(long)]
    pub no_runtime: bool,
}

#[derive(Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value = "0")]
    pub epsilon: String,
    /// Comma-separated seeds or half-open ranges such as 0..10.
    #[arg(long, default_value = "0..10")]
    pub seeds: String,
    #[arg(long, value_enum, default_value_t)]
    pub scheduler: SchedulerArg,
    #[arg(long)]
    pub fast: bool,
    /// Per-seed CSV; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Per-algorithm means over all seeds.
    #[arg(long, value_name = "PATH")]
    pub out_summary: Option<PathBuf>,
    #[arg(long)]
    pub no_runtime: bool,
}

#[derive(Args)]
pub struct SingletonArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 2)]
    pub k_min: usize,
    /// Defaults to n.
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct DendrogramArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Check every guarantee on random point sets against exhaustive optima.
    Verify(VerifyArgs),
    /// LPT and exact max-min schedules side by side.
    Sched(SchedArgs),
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long = "L", value_name = "L", default_value_t = 1)]
    pub min_size: usize,
    #[arg(long, default_value = "0")]
    pub epsilon: String,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SchedArgs {
    /// Comma-separated positive item sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<u64>,
    #[arg(long)]
    pub k: usize,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("SPACING_CLUST_THREADS") else { return Ok(()) };
    let threads: usize =
        value.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
            CliError::config(format!("SPACING_CLUST_THREADS must be a positive integer, got {value:?}"))
        })?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| CliError::internal(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Run(args) => commands::run(&args),
        Command::Compare(args) => commands::compare(&args),
        Command::Singletons(args) => commands::singletons(&args),
        Command::Dendrogram(args) => commands::dendrogram(&args),
        Command::Oracle(OracleCommand::Verify(args)) => commands::oracle_verify(&args),
        Command::Oracle(OracleCommand::Sched(args)) => commands::oracle_sched(&args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
