//! `mkmc`: generate, mask, complete and evaluate multi-kernel data sets.

mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mkmc_core::dataset::KernelFormat;
use mkmc_core::{Method, DEFAULT_LAMBDA};

#[derive(Debug, Parser)]
#[command(name = "mkmc", version, about = "Mutual completion of incomplete kernel matrices")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Seed for every random draw
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Weight of the identity prior
    #[arg(long, global = true, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    /// Relative change of the objective that stops the iteration
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 200)]
    pub max_iters: usize,
    /// Worker threads for the per-kernel E-steps
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Kernel file format written (and read when extensions are ambiguous)
    #[arg(long, global = true, default_value = "csv", value_parser = parse_format)]
    pub format: KernelFormat,
    /// Report errors on stderr as JSON
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate synthetic multi-view kernels and labels
    Synth(SynthArgs),
    /// Write nested mask schedules for a kernel directory, or check one
    Mask(MaskArgs),
    /// Complete the hidden rows and columns of a kernel directory
    Complete(CompleteArgs),
    /// Score completed kernels against the truth
    Eval(EvalArgs),
    /// Sweep methods, missing ratios and seeds on synthetic data
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    /// Number of objects
    #[arg(long, default_value_t = 200)]
    pub l: usize,
    /// Number of kernels
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Latent feature dimension
    #[arg(long, default_value_t = 20)]
    pub d: usize,
    /// Per-view noise scale
    #[arg(long, default_value_t = 0.3)]
    pub sigma: f64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    /// Kernel directory to build the schedule for
    #[arg(long, required_unless_present = "check")]
    pub input: Option<PathBuf>,
    /// Comma separated missing ratios
    #[arg(long, value_delimiter = ',', default_values_t = mkmc_core::dataset::default_ratios())]
    pub ratios: Vec<f64>,
    #[arg(long, required_unless_present = "check")]
    pub out: Option<PathBuf>,
    /// Verify nestedness of an existing schedule directory instead
    #[arg(long, conflicts_with_all = ["input", "out"])]
    pub check: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompleteArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Directory of mask sidecars overriding the masks stored in the files
    #[arg(long)]
    pub masks: Option<PathBuf>,
    #[arg(long, default_value = "mkmc", value_parser = parse_method)]
    pub method: Method,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub est: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Number of labelled objects used for training
    #[arg(long)]
    pub train_size: usize,
    /// SVM box constraint
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Report file; defaults to report.csv in the estimate directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, value_delimiter = ',', default_values_t = mkmc_core::dataset::default_ratios())]
    pub ratios: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "mkmc,zero,mean", value_parser = parse_method)]
    pub methods: Vec<Method>,
    /// Number of seeds, counting up from --seed
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    /// Training objects per split; defaults to half the objects
    #[arg(long)]
    pub train_size: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_format(s: &str) -> Result<KernelFormat, String> {
    s.parse().map_err(|e: mkmc_core::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: mkmc_core::Error| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json = cli.global.json;
    let result = match cli.command {
        Command::Synth(a) => commands::synth(&cli.global, &a),
        Command::Mask(a) => commands::mask(&cli.global, &a),
        Command::Complete(a) => commands::complete(&cli.global, &a),
        Command::Eval(a) => commands::eval(&cli.global, &a),
        Command::Bench(a) => commands::bench(&cli.global, &a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            failure.report(json);
            ExitCode::from(failure.exit_code())
        }
    }
}
