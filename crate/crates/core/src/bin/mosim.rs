use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mosim::cli::{
    cmd_case_study, cmd_simulate, cmd_survival, cmd_transition_matrix, exit_code, parse_times,
    OutputFormat, SimulateOptions,
};

/// Simulation of dependent default times: Marshall-Olkin shock models,
/// looping-default Markov chains, Levy-frailty factor models, and
/// copula-linked exponential margins.
#[derive(Parser)]
#[command(name = "mosim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate default-time paths from a JSON model config.
    Simulate {
        /// Path to the model-config document.
        config: PathBuf,
        /// Output file (standard output if omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Number of paths (overrides the config).
        #[arg(long)]
        paths: Option<u64>,
        /// Random seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Output format.
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        /// Worker threads (default: MO_SIM_WORKERS or all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Also record the indicator path on the config grid.
        #[arg(long)]
        indicators: bool,
    },
    /// Evaluate the exact joint survival probability P(tau_1 > t_1, ...).
    Survival {
        /// Path to the model-config document.
        config: PathBuf,
        /// Comma-separated times, one per component, e.g. "10,5".
        #[arg(long)]
        t: String,
    },
    /// Reproduce the stepwise-vs-direct simulation comparison table.
    CaseStudy {
        /// Monte Carlo samples per cell (0 = exact column only).
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        /// Random seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV file (standard output if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: MO_SIM_WORKERS or all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Export the transition matrix P[t] of a Markov-chain model as CSV.
    TransitionMatrix {
        /// Path to the model-config document (freund, acbve or looping).
        config: PathBuf,
        /// Horizon t of the transition matrix.
        #[arg(long)]
        t: f64,
        /// Output file (standard output if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out, paths, seed, format, workers, indicators } => {
            let opts = SimulateOptions {
                paths,
                seed,
                format: match format {
                    FormatArg::Csv => OutputFormat::Csv,
                    FormatArg::Jsonl => OutputFormat::Jsonl,
                },
                workers,
                indicators,
                output: out,
            };
            cmd_simulate(&config, &opts)
        }
        Command::Survival { config, t } => parse_times(&t)
            .and_then(|times| cmd_survival(&config, &times))
            .map(|formatted| println!("{formatted}")),
        Command::CaseStudy { n, seed, out, workers } => {
            cmd_case_study(n, seed, out.as_deref(), workers)
        }
        Command::TransitionMatrix { config, t, out } => {
            cmd_transition_matrix(&config, t, out.as_deref())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
