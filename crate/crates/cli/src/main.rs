use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use crossdrift::diagnostics::LmOrder;

mod args;
mod commands;

use args::{parse_density, parse_nonneg, parse_positive, DensityArg};

/// Event-driven simulation of two-species particle drift in one dimension.
#[derive(Debug, Parser)]
#[command(name = "crossdrift", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one particle system and write its diagnostics.
    Simulate(SimulateArgs),
    /// Self-convergence study over a list of particle counts.
    Converge(ConvergeArgs),
    /// Count collisions up to stationarity for several particle counts.
    Census(CensusArgs),
    /// Compare the engine against a regularized fine-step integration.
    OracleCompare(OracleArgs),
}

#[derive(Debug, Clone, Args)]
struct Densities {
    /// Density of the first species: uniform:a,b, mix:w*uniform:a,b+..., cdf:PATH.
    #[arg(long, default_value = "uniform:-2,-1", value_parser = parse_density, allow_hyphen_values = true)]
    rho: DensityArg,
    /// Density of the second species.
    #[arg(long, default_value = "uniform:1,2", value_parser = parse_density, allow_hyphen_values = true)]
    eta: DensityArg,
}

#[derive(Debug, Clone, Args)]
struct Tolerances {
    /// Co-location tolerance relative to the initial support diameter.
    #[arg(long, default_value_t = 1e-12, value_parser = parse_nonneg)]
    colocation_rel: f64,
    /// Relative window within which collisions count as simultaneous.
    #[arg(long, default_value_t = 1e-12, value_parser = parse_nonneg)]
    tie_rel: f64,
}

#[derive(Debug, Clone, Args)]
struct Positions {
    /// Explicit sorted positions of the first species, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "y")]
    x: Option<Vec<f64>>,
    /// Explicit sorted positions of the second species, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "x")]
    y: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    densities: Densities,
    /// Particles per species.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), required_unless_present = "x")]
    n: Option<u64>,
    /// Final time; `inf` runs until every particle is at rest.
    #[arg(long, value_parser = parse_nonneg)]
    t: f64,
    #[command(flatten)]
    positions: Positions,
    /// Output directory for trace.csv, trajectory.csv and config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also record the state every `dt` time units.
    #[arg(long, value_parser = parse_positive)]
    sample: Option<f64>,
    /// Exponents of the monitored density norms.
    #[arg(long, value_delimiter = ',', default_value = "2,3,inf")]
    m_list: Vec<LmOrder>,
    /// Skip trajectory.csv, which grows like N^3.
    #[arg(long)]
    no_trajectory: bool,
    #[command(flatten)]
    tolerances: Tolerances,
}

#[derive(Debug, Args)]
struct ConvergeArgs {
    #[command(flatten)]
    densities: Densities,
    /// Increasing particle counts.
    #[arg(long, value_delimiter = ',', default_value = "25,50,100,200")]
    n_list: Vec<usize>,
    /// Wasserstein order.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Final time.
    #[arg(long, value_parser = parse_nonneg)]
    t: f64,
    /// Times at which the counts are compared; defaults to 0 and the final time.
    #[arg(long, value_delimiter = ',')]
    eval_times: Option<Vec<f64>>,
    /// Exponents of the monitored density norms.
    #[arg(long, value_delimiter = ',', default_value = "2,3,inf")]
    m_list: Vec<LmOrder>,
    /// Output directory for the study.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Recorded with the study; the presets involve no randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run the particle counts one after another.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    tolerances: Tolerances,
}

#[derive(Debug, Args)]
struct CensusArgs {
    #[command(flatten)]
    densities: Densities,
    /// Increasing particle counts.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20,40")]
    n_list: Vec<usize>,
    /// CSV file to write; printed to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tolerances: Tolerances,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    densities: Densities,
    /// Particles per species.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), required_unless_present = "x")]
    n: Option<u64>,
    /// Final time.
    #[arg(long, value_parser = parse_nonneg)]
    t: f64,
    /// Regularization width of the sign kernel.
    #[arg(long, default_value_t = 1e-4, value_parser = parse_positive)]
    delta: f64,
    /// RK4 step; at most delta/4.
    #[arg(long, default_value_t = 1e-6, value_parser = parse_positive)]
    dt: f64,
    /// Number of comparison points along the run.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    points: u64,
    #[command(flatten)]
    positions: Positions,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Converge(a) => commands::converge(a),
        Command::Census(a) => commands::census(a),
        Command::OracleCompare(a) => commands::oracle_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            match e.violated_property() {
                Some(property) => eprintln!("invariant violated ({property}): {e}"),
                None => eprintln!("error: {e}"),
            }
            ExitCode::from(code)
        }
    }
}

/// 66 for unreadable inputs or unwritable outputs, 70 for a broken
/// invariant, 2 for anything the user can fix in the arguments.
fn exit_code(e: &crossdrift::Error) -> u8 {
    if matches!(e, crossdrift::Error::Io { .. }) {
        66
    } else if e.is_invariant_violation() {
        70
    } else {
        2
    }
}
