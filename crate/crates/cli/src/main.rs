mod commands;
mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Equilibria and stability of bilateral contests on networks.
///
/// Exit status: 0 on success, 1 on a usage error or malformed scenario,
/// 2 on a numeric failure (non-convergence, failed bracketing, failed
/// validation property).
#[derive(Parser, Debug)]
#[command(name = "contestnet", version)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Write results here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    /// Equilibrium method.
    #[arg(long, default_value = "auto")]
    pub method: String,
    /// KKT residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Seed for a randomised starting point (default: deterministic start).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// Gains at or below this count as zero.
    #[arg(long, default_value_t = 1e-9)]
    pub search_tol: f64,
    /// Non-neighbour count up to which every target subset is searched.
    #[arg(long, default_value_t = 12)]
    pub exhaustive_limit: usize,
    /// Strength-multiset count searched exhaustively beyond that limit.
    #[arg(long, default_value_t = 4096)]
    pub multiset_limit: usize,
    /// Grid points of the one-dimensional search against a replying target.
    #[arg(long, default_value_t = 80)]
    pub grid_points: usize,
}

/// Game primitives for commands that do not need a structure. Without a
/// scenario the benchmark game is used: φ(x) = x, c(x) = x², r = 0, T = 1.
#[derive(Args, Debug, Clone)]
pub struct GameArgs {
    /// Scenario file supplying φ, c, r and T (its structure is ignored).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Override the draw parameter r.
    #[arg(long)]
    pub r: Option<f64>,
    /// Override the transfer T.
    #[arg(long = "transfer")]
    pub transfer: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the equilibrium efforts on the scenario's structure.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Check a stability notion for the scenario's structure.
    Stability {
        #[arg(long)]
        scenario: PathBuf,
        /// nash, sps (strong pairwise) or lfps.
        #[arg(long, default_value = "lfps")]
        concept: String,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Group equilibrium players into strength classes and check the
    /// complete multipartite conditions.
    Classify {
        #[arg(long)]
        scenario: PathBuf,
        /// Relative tolerance for grouping totals.
        #[arg(long, default_value_t = 1e-6)]
        group_tol: f64,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Largest victim class keeping B(n−v, v) stable against link deletion.
    Threshold {
        #[arg(long)]
        n: usize,
        /// Treat |f| at or below this as zero.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Re-solve the scenario along a parameter grid.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// r, T, cost_scale, partition_v or br_curve.
        #[arg(long)]
        kind: String,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["from", "to", "points"])]
        values: Option<Vec<f64>>,
        /// First grid value of an evenly spaced grid.
        #[arg(long, requires_all = ["to", "points"])]
        from: Option<f64>,
        /// Last grid value.
        #[arg(long)]
        to: Option<f64>,
        /// Number of grid points.
        #[arg(long)]
        points: Option<usize>,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Response of B(a, v) totals to a marginal cost shock on one player,
    /// together with the r-derivatives of the efforts.
    Shock {
        #[arg(long)]
        a: usize,
        #[arg(long)]
        v: usize,
        /// attacker or victim.
        #[arg(long, default_value = "attacker")]
        role: String,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Random pair revisions of the scenario's structure, one JSON line per
    /// period.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 100)]
        periods: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Structures with no farsightedly improving path (n ≤ 4).
    Farsighted {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Run the invariant suite on a scenario and report each property.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::failure_code(&e))
        }
    }
}
