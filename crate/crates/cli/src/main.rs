//! `hcdyn` command-line front end.
//!
//! Exit codes: 0 success, 2 bad flag, config or input file, 3 numerical
//! failure on valid input, 4 file system error.

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Overrides;
use crate::error::CliResult;

#[derive(Parser)]
#[command(
    name = "hcdyn",
    version,
    about = "Hybrid cloud database simulator and linear systems toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the batch benchmark and write local.csv, hybrid.csv, ratio.csv and summary.csv
    Bench {
        /// Run configuration (TOML)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory [default: .]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Calibration profile: test1 or test2
        #[arg(long)]
        profile: Option<String>,
        /// Corpus and stream seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print stability, controllability, observability and step response of a model
    Analyze {
        model: PathBuf,
        /// Also write analysis.csv into this directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit (A, B) to a trajectory CSV, writing model.toml and fit_report.csv
    Fit {
        trace: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Simulate a model over a controls CSV (header u1..um)
    Simulate {
        model: PathBuf,
        controls: PathBuf,
        /// Initial state, comma separated [default: zeros]
        #[arg(long)]
        x0: Option<String>,
        /// Write trajectory.csv here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the unit step response of one control channel, writing step.csv
    Step {
        model: PathBuf,
        /// Control channel, 1-based
        #[arg(long, default_value_t = 1)]
        channel: usize,
        #[arg(long, default_value_t = hcdyn::statespace::DEFAULT_STEP_HORIZON)]
        horizon: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Refit a calibration profile against its reference timings
    Calibrate {
        #[arg(long)]
        profile: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Bench {
            config,
            out,
            profile,
            seed,
        } => {
            let paths = commands::bench(&Overrides {
                config,
                out,
                profile,
                seed,
            })?;
            print_paths(&paths);
        }
        Command::Analyze { model, out } => print!("{}", commands::analyze(&model, out.as_deref())?),
        Command::Fit { trace, out } => print_paths(&commands::fit(&trace, &out)?),
        Command::Simulate {
            model,
            controls,
            x0,
            out,
        } => {
            let csv = commands::simulate_cmd(&model, &controls, x0.as_deref(), out.as_deref())?;
            std::io::stdout()
                .write_all(csv.as_bytes())
                .map_err(|e| error::CliError::io(Path::new("<stdout>"), e))?;
        }
        Command::Step {
            model,
            channel,
            horizon,
            out,
        } => print!("{}", commands::step_cmd(&model, channel, horizon, &out)?),
        Command::Calibrate { profile, seed, out } => {
            let (paths, report) = commands::calibrate_cmd(&Overrides {
                config: None,
                out,
                profile,
                seed,
            })?;
            print!("{report}");
            print_paths(&paths);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hcdyn: {e}");
            e.exit_code()
        }
    }
}
