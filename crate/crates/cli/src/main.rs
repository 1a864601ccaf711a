use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stackplane::config::ModelKind;
use stackplane::verify::{Budget, Suite};

mod commands;
mod error;
mod output;

use error::CliError;

/// Random stack triangulations: sampling, drawing and limit statistics.
#[derive(Debug, Parser)]
#[command(name = "stackplane", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a labelled tree and write it as stackplane-tree-v1 JSON.
    Sample(SampleArgs),
    /// Render a tree file as SVG, optionally with a vertex CSV.
    Draw(DrawArgs),
    /// Monte Carlo statistics of a model, or summary statistics of a tree file.
    Stats(StatsArgs),
    /// Run a fixed-seed verification suite and print its JSON report.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// uniform, increasing, limit-tree or limit-drawing.
    #[arg(long)]
    model: Option<ModelKind>,
    /// Number of inserted vertices (uniform and increasing models).
    #[arg(long)]
    n: Option<usize>,
    /// Spine depth (limit-tree and limit-drawing).
    #[arg(long)]
    depth: Option<usize>,
    /// Splitting law: centroid or dirichlet:ALPHA.
    #[arg(long, default_value = "centroid")]
    law: String,
    /// Node budget for each off-spine subtree of a limit tree.
    #[arg(long)]
    node_cap: Option<usize>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DrawArgs {
    /// Labelled tree file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also write the vertex coordinates here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Radius of the dot drawn at each vertex, in pixels.
    #[arg(long)]
    vertex_radius: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    width: u32,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Summarise this tree file instead of sampling a model.
    #[arg(long, conflicts_with_all = ["model", "n", "depth", "node_cap", "seed", "replicas"])]
    input: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, required_unless_present = "input")]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// bijection, fragmentation, uniform-limit, increasing-limit or dimension.
    suite: Suite,
    /// quick or full.
    #[arg(long, default_value = "full")]
    budget: Budget,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sample(a) => commands::sample(a),
        Command::Draw(a) => commands::draw(a),
        Command::Stats(a) => commands::stats(a),
        Command::Verify(a) => commands::verify(a),
    }
}

fn main() -> ExitCode {
    stackplane::parallel::init_from_env();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stackplane: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
