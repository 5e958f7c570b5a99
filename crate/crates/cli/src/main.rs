//! Experiment harness: similarity-table generation, single allocation runs,
//! bandwidth sweeps and offline result audits.
//!
//! Exit codes: 0 success, 1 validation failure (bad inputs or failed
//! audits), 2 operational failure (solver breakdown, table cannot cover the
//! scenario), 64 usage.

mod commands;

use clap::{Parser, Subcommand};

use commands::{GenTableArgs, RunArgs, SweepArgs, ValidateArgs};

#[derive(Parser)]
#[command(name = "semra", version, about = "Semantic-aware uplink resource allocation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a similarity lookup table CSV from the synthetic surrogate.
    GenTable(GenTableArgs),
    /// Allocate resources for one scenario with one method.
    Run(RunArgs),
    /// Run bandwidth x seed x method cells and emit figure CSVs.
    Sweep(SweepArgs),
    /// Re-audit a users.csv against the scenario's constraints.
    Validate(ValidateArgs),
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
        }
    };
    let outcome = match cli.command {
        Command::GenTable(args) => commands::gen_table(args),
        Command::Run(args) => commands::run(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Validate(args) => commands::validate(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
