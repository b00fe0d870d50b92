mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use label_oracle::index::RangeMode;
use label_oracle::stretch::Epsilon;

use commands::CliError;

/// Approximate vertex-to-label distances on planar graphs.
#[derive(Parser, Debug)]
#[command(name = "label-oracle", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a labeled grid-like planar graph in PLGRAPH format.
    Gen(GenArgs),
    /// Preprocess a graph into an oracle file.
    Build(BuildArgs),
    /// Answer one vertex-to-label query.
    Query(QueryArgs),
    /// Change one vertex's label and rewrite the oracle file.
    Relabel(RelabelArgs),
    /// Check every (or a sample of) query against exact distances.
    Verify(VerifyArgs),
    /// Build and measure oracles over a sweep of sizes and ε, as CSV.
    Bench(BenchArgs),
    /// Print space accounting of an oracle file.
    Stats(StatsArgs),
}

#[derive(Args, Debug, Clone)]
struct GenArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long, default_value_t = 2)]
    labels: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Uniform integer edge lengths, `MIN:MAX`.
    #[arg(long, default_value = "1:100", value_parser = parse_weights)]
    weights: (u32, u32),
    /// Fraction of grid edges kept (connectivity is preserved). Below 1 the
    /// graph has `rows * cols` vertices laid out on a near-square grid.
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StretchArgs {
    /// ε as `P/Q` with 0 < P/Q < 1.
    #[arg(long, conflicts_with = "three_stretch", required_unless_present = "three_stretch")]
    eps: Option<Epsilon>,
    /// One portal per path; stretch at most 3.
    #[arg(long)]
    three_stretch: bool,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    stretch: StretchArgs,
    /// `binary` or `bitvector`.
    #[arg(long, default_value = "binary")]
    range_mode: RangeMode,
    #[arg(long, default_value_t = 1)]
    leaf_max: usize,
    /// Shortest-path-tree root instead of the computed center.
    #[arg(long)]
    root: Option<u32>,
}

#[derive(Args, Debug)]
struct QueryArgs {
    #[arg(long)]
    oracle: PathBuf,
    #[arg(long)]
    vertex: u32,
    #[arg(long)]
    label: u32,
    /// Overrides the range mode stored in the oracle.
    #[arg(long)]
    range_mode: Option<RangeMode>,
}

#[derive(Args, Debug)]
struct RelabelArgs {
    #[arg(long)]
    oracle: PathBuf,
    #[arg(long)]
    vertex: u32,
    #[arg(long)]
    label: u32,
    /// Destination; the input file is rewritten when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    oracle: PathBuf,
    /// Check this many random (vertex, label) pairs instead of all.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Square grid side lengths.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    sides: Vec<usize>,
    /// ε values `P/Q`; `3` selects the 3-stretch mode.
    #[arg(long, value_delimiter = ',', default_value = "1/4")]
    eps: Vec<String>,
    #[arg(long, default_value_t = 5)]
    labels: u32,
    /// Random queries per configuration; 0 runs every (vertex, label) pair.
    #[arg(long, default_value_t = 1000)]
    queries: usize,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "binary")]
    range_mode: RangeMode,
    #[arg(long, default_value = "1:100", value_parser = parse_weights)]
    weights: (u32, u32),
    #[arg(long, default_value_t = 1.0)]
    density: f64,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long)]
    oracle: PathBuf,
}

fn parse_weights(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected MIN:MAX, got '{s}'"))?;
    let a: u32 = a.parse().map_err(|e| format!("bad minimum '{a}': {e}"))?;
    let b: u32 = b.parse().map_err(|e| format!("bad maximum '{b}': {e}"))?;
    if a > b {
        return Err(format!("minimum {a} exceeds maximum {b}"));
    }
    Ok((a, b))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Build(a) => commands::build(a),
        Command::Query(a) => commands::query(a),
        Command::Relabel(a) => commands::relabel(a),
        Command::Verify(a) => commands::verify(a),
        Command::Bench(a) => commands::bench(a),
        Command::Stats(a) => commands::stats(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
