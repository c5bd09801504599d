use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qmt_cli::{Mode, OracleArgs, Outcome, PropagateArgs, MAX_FRAME_ENV};
use qmt_core::oracle::DEFAULT_ORACLE_MAX_FRAME;

#[derive(Parser)]
#[command(name = "qmt", version, about = "Belief-function propagation in qualitative Markov trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Batch,
    Concurrent,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a model is a qualitative Markov tree.
    Validate { model: PathBuf },
    /// Propagate evidence and print node marginals.
    Propagate {
        model: PathBuf,
        evidence: Vec<PathBuf>,
        /// Print only this node.
        #[arg(long, conflicts_with = "all")]
        node: Option<String>,
        /// Print every node (the default).
        #[arg(long)]
        all: bool,
        /// Write the rule firing log as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        skip_markov_check: bool,
        #[arg(long, value_enum, default_value = "batch")]
        mode: ModeArg,
        /// Scheduler seed for `--mode concurrent`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare propagated marginals with a global brute-force combination.
    OracleCheck {
        model: PathBuf,
        evidence: Vec<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

fn oracle_cap() -> Result<usize, String> {
    match std::env::var(MAX_FRAME_ENV) {
        Ok(v) => v.parse().map_err(|_| format!("{MAX_FRAME_ENV} must be an integer, got `{v}`")),
        Err(_) => Ok(DEFAULT_ORACLE_MAX_FRAME),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate { model } => qmt_cli::validate(&model),
        Command::Propagate { model, evidence, node, all: _, trace, skip_markov_check, mode, seed } => {
            let mode = match mode {
                ModeArg::Batch => Mode::Batch,
                ModeArg::Concurrent => Mode::Concurrent { seed },
            };
            qmt_cli::propagate(&PropagateArgs { model, evidence, node, trace, skip_markov_check, mode })
        }
        Command::OracleCheck { model, evidence, tol } => match oracle_cap() {
            Ok(max_frame) => qmt_cli::oracle_check(&OracleArgs { model, evidence, tol, max_frame }),
            Err(e) => Outcome { code: 1, stdout: String::new(), stderr: format!("error: {e}\n") },
        },
    };
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    let _ = std::io::stdout().flush();
    ExitCode::from(outcome.code as u8)
}
