//! `ccomp`: build concept subspaces, compose embeddings, inspect spectra and
//! score results from the command line.
//!
//! Exit codes: 0 success, 2 usage error, 3 refused (existing output), 4 data
//! error. Every failure prints one JSON object with a `code` field to stderr.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use concept_compose::eval::AblationMethod;
use concept_compose::{RankClass, SubspaceSource};

use error::{CliError, EXIT_USAGE};

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ccomp",
    version,
    about = "Concept subspace composition in embedding space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a concept subspace from a prompt bank and its embedding matrix.
    Build(BuildArgs),
    /// Compose a reference embedding with one or more concepts.
    Compose(ComposeArgs),
    /// Print the singular spectrum of an embedding matrix as CSV.
    Inspect(InspectArgs),
    /// Score a generated embedding against concept and leakage descriptions.
    Eval(EvalArgs),
    /// Run the synthetic ablation benchmark.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RankClassArg {
    LowVariation,
    HighVariation,
    Custom,
}

impl From<RankClassArg> for RankClass {
    fn from(c: RankClassArg) -> Self {
        match c {
            RankClassArg::LowVariation => RankClass::LowVariation,
            RankClassArg::HighVariation => RankClass::HighVariation,
            RankClassArg::Custom => RankClass::Custom,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SourceArg {
    TextSpanned,
    ImageSpanned,
}

impl From<SourceArg> for SubspaceSource {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::TextSpanned => SubspaceSource::TextSpanned,
            SourceArg::ImageSpanned => SubspaceSource::ImageSpanned,
        }
    }
}

#[derive(Debug, Args)]
struct BuildArgs {
    /// Prompt bank JSON file.
    #[arg(long)]
    bank: PathBuf,
    /// (n, d) embedding matrix, one row per prompt.
    #[arg(long)]
    embeddings: PathBuf,
    /// Subspace rank.
    #[arg(long, value_parser = positive, conflicts_with = "rank_class")]
    rank: Option<usize>,
    /// Use the default rank of a class instead of `--rank`. Without either,
    /// the bank's own rank class is used.
    #[arg(long, value_enum)]
    rank_class: Option<RankClassArg>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overwrite an existing output directory.
    #[arg(long)]
    force: bool,
    #[arg(long, value_enum, default_value = "text-spanned")]
    source: SourceArg,
    /// L2-normalize rows before the SVD. Diagnostic only.
    #[arg(long)]
    normalize_rows: bool,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
enum CrossTermsArg {
    #[default]
    Keep,
    SubtractDiagnostic,
}

#[derive(Debug, Args)]
struct ComposeArgs {
    /// Composition manifest JSON.
    #[arg(long)]
    manifest: PathBuf,
    /// Output (d,) embedding file.
    #[arg(long)]
    out: PathBuf,
    /// One-step only: also subtract pairwise projector overlap terms.
    #[arg(long, value_enum, default_value = "keep")]
    cross_terms: CrossTermsArg,
}

#[derive(Debug, Args)]
struct InspectArgs {
    #[arg(long)]
    embeddings: PathBuf,
    /// Only print the first k rows.
    #[arg(long, value_parser = positive)]
    top: Option<usize>,
    /// L2-normalize rows first. Diagnostic only.
    #[arg(long)]
    normalize_rows: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("format").required(true).args(["json", "csv"])))]
struct EvalArgs {
    #[arg(long)]
    generated: PathBuf,
    /// Concept description embeddings, `name=path` or `path` (named by file stem).
    #[arg(long, num_args = 1.., required = true)]
    concepts: Vec<String>,
    /// Leakage description embeddings, same syntax as `--concepts`.
    #[arg(long, num_args = 1..)]
    leaks: Vec<String>,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    csv: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    ProjectionCompose,
    Interpolation,
    ImageSpannedSubspace,
}

impl From<MethodArg> for AblationMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::ProjectionCompose => AblationMethod::ProjectionCompose,
            MethodArg::Interpolation => AblationMethod::Interpolation,
            MethodArg::ImageSpannedSubspace => AblationMethod::ImageSpannedSubspace,
        }
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("format").required(true).args(["json", "csv"])))]
struct BenchmarkArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 2)]
    concepts: usize,
    #[arg(long, default_value_t = 3)]
    rank: usize,
    /// Size of the reference residual block and of the background block.
    #[arg(long, default_value_t = 2)]
    residual_dims: usize,
    /// Prompts per synthetic text bank.
    #[arg(long, default_value_t = 150)]
    prompts: usize,
    /// Background noise level of image samples.
    #[arg(long, default_value_t = 0.3)]
    noise: f64,
    /// Image samples per image-spanned subspace.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Independent image sample sets per concept.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Interpolation weight of the concept image.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Methods to run; all by default.
    #[arg(long, value_enum)]
    method: Vec<MethodArg>,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Build(a) => commands::build(a),
        Command::Compose(a) => commands::compose(a),
        Command::Inspect(a) => commands::inspect(a),
        Command::Eval(a) => commands::eval(a),
        Command::Benchmark(a) => commands::benchmark(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let message = e.render().to_string();
            let err = CliError::new(EXIT_USAGE, "usage", message.trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit)
        }
    }
}
