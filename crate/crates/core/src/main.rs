use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aircomp::harness::{self, OutputFormat};
use aircomp::Error;

#[derive(Parser)]
#[command(name = "aircomp", version, about = "Movable-antenna AirComp MSE experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured sweep and write summary statistics.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        /// Overrides `master_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `trials`.
        #[arg(long)]
        trials: Option<usize>,
        /// Also write every trial's outcome and final positions as JSON.
        #[arg(long)]
        dump_trials: Option<PathBuf>,
    },
    /// Parse and validate a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Validate { config } => {
            harness::parse_config(&config)?;
            eprintln!("{}: ok", config.display());
        }
        Command::Run {
            config,
            out,
            format,
            seed,
            trials,
            dump_trials,
        } => {
            let mut cfg = harness::parse_config(&config)?;
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            if let Some(trials) = trials {
                cfg.trials = trials;
            }
            cfg.validate()?;
            let (results, records) = harness::run_experiment_with_trials(&cfg)?;
            match out {
                Some(path) => harness::write_results(&results, path, format)?,
                None => match format {
                    OutputFormat::Csv => print!("{}", harness::to_csv(&results)),
                    OutputFormat::Json => println!("{}", harness::output::to_json(&results)?),
                },
            }
            if let Some(path) = dump_trials {
                harness::write_trials(&records, path)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
