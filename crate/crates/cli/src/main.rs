mod commands;
mod stamp;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};

use perturb_icp::icp::ResidualScope;
use perturb_icp::perturb::PgMode;
use perturb_icp::stats::InvarianceTest;

/// Perturbation graphs, transitive-reduction pruning and invariant causal
/// prediction for linear Gaussian data.
#[derive(Debug, Parser)]
#[command(name = "perturb-icp", version, about)]
struct Cli {
    /// Worker threads for the parallel stages; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a dataset from a model and a context list.
    Simulate(SimulateArgs),
    /// Build the perturbation graph of a dataset.
    Pgraph(PgraphArgs),
    /// Prune a perturbation graph by the path-correlation rule.
    Tr(TrArgs),
    /// Invariant causal prediction for one target or every node.
    Icp(IcpArgs),
    /// Run a Monte Carlo experiment spec.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Model JSON: labels, edges, optional noise_var / noise_mean.
    sem: PathBuf,
    /// Context list JSON.
    contexts: PathBuf,
    /// Rows per context.
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// CSV with a leading `context` column.
    data: PathBuf,
    /// Context list JSON mapping context ids to intervened columns.
    #[arg(long)]
    contexts: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PgraphArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = "strict", value_parser = parse_mode)]
    mode: PgMode,
    /// Output JSON; a `.dot` file is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrArgs {
    /// Perturbation graph JSON written by `pgraph`.
    pg: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("which").required(true).args(["target", "all"])))]
struct IcpArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Label of the target variable.
    #[arg(long)]
    target: Option<String>,
    /// Run every variable as target and emit the graph.
    #[arg(long)]
    all: bool,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = "regression", value_parser = parse_test)]
    test: InvarianceTest,
    /// Largest predictor set tried (drops the coverage guarantee).
    #[arg(long)]
    max_set_size: Option<usize>,
    /// Refuse targets with more candidate predictors than this.
    #[arg(long, default_value_t = 20)]
    max_p: usize,
    #[arg(long, default_value = "predictors", value_parser = parse_scope)]
    residual_scope: ResidualScope,
    /// With --all, test each target at alpha / p.
    #[arg(long)]
    bonferroni_targets: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Confidence-interval table.
    #[arg(long)]
    ci_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Experiment spec JSON.
    spec: PathBuf,
    /// Directory for summary.json and records.csv.
    #[arg(long)]
    out: PathBuf,
}

fn parse_mode(s: &str) -> Result<PgMode, String> {
    s.parse().map_err(|e: perturb_icp::Error| e.to_string())
}

fn parse_test(s: &str) -> Result<InvarianceTest, String> {
    s.parse().map_err(|e: perturb_icp::Error| e.to_string())
}

fn parse_scope(s: &str) -> Result<ResidualScope, String> {
    s.parse().map_err(|e: perturb_icp::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: cannot start thread pool: {e}");
        return ExitCode::from(1);
    }
    let run = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Pgraph(a) => commands::pgraph(a),
        Command::Tr(a) => commands::tr(a),
        Command::Icp(a) => commands::icp(a),
        Command::Bench(a) => commands::bench(a),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
