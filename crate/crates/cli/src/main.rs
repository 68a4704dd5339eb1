//! `bbcool`: synthesis, sweeps, switching curves and verification.
//!
//! Exit codes: 0 ok, 2 usage or parse error, 3 infeasible, 4 verification failure.

mod commands;
mod config;
mod doc;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CommonArgs, Format};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "bbcool", version, about = "Time-optimal bang-bang cooling schedules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transfer time of every candidate turn count, per target.
    Times {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// The optimal schedule for one target.
    Synthesize {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Switching curves over a target range, written into the --output directory.
    Curves {
        #[command(flatten)]
        common: CommonArgs,
        /// Samples per curve and per overlay arc.
        #[arg(long, default_value_t = 100)]
        resolution: usize,
        /// Targets whose optimal trajectories are sampled for overlay.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        overlay: Vec<f64>,
    },
    /// Check a schedule against the ODE and maximum-principle oracle.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Schedule JSON from `synthesize`; otherwise one is synthesized from the flags.
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Times { common } => commands::cmd_times(&common.resolve(Format::Csv, true)?),
        Command::Synthesize { common } => commands::cmd_synthesize(&common.resolve(Format::Json, true)?),
        Command::Curves {
            common,
            resolution,
            overlay,
        } => commands::cmd_curves(&common.resolve(Format::Csv, true)?, resolution, &overlay),
        Command::Verify { common, schedule } => {
            let cfg = common.resolve(Format::Json, schedule.is_none())?;
            commands::cmd_verify(&cfg, schedule.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bbcool: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
