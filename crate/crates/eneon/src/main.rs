use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eneon::{describe, validate, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "eneon", version, about = "Electron-on-neon / magnon coupling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Print the resolved parameters without simulating.
    Describe { config: PathBuf },
    /// Run the oracle and invariant checks.
    Validate {
        #[arg(long)]
        fast: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, output_dir } => eneon::run_config(&config, output_dir).map(|m| {
            for f in &m.files {
                println!("{}  {}", f.sha256, f.name);
            }
        }),
        Command::Describe { config } => ExperimentConfig::load(&config)
            .and_then(|(cfg, _)| describe::describe(&cfg))
            .map(|text| print!("{text}")),
        Command::Validate { fast } => {
            let checks = validate::run_checks(fast, |c| println!("{c}"));
            match validate::failures(&checks) {
                0 => Ok(()),
                failed => Err(CliError::ValidationFailed { failed }),
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
