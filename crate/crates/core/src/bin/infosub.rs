use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use infosub::cli::{run_file, validate_file};

#[derive(Parser)]
#[command(
    name = "infosub",
    version,
    about = "Information Subtraction experiments"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output root, overriding the config and INFOSUB_OUTPUT_ROOT.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Master seed, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a config file and list every problem found.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    match args.command {
        Command::Validate { config } => match validate_file(&config) {
            Ok(v) if v.is_empty() => {
                println!("{}: ok", config.display());
                ExitCode::SUCCESS
            }
            Ok(v) => {
                for m in &v {
                    println!("{m}");
                }
                ExitCode::from(2)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::Run {
            config,
            output,
            seed,
        } => match run_file(&config, output.as_deref(), seed) {
            Ok(summary) => {
                println!("{}", summary.run_dir.display());
                ExitCode::SUCCESS
            }
            Err(e) => {
                let err = anyhow::Error::new(e);
                eprintln!("error: {err:?}");
                let code = err
                    .downcast_ref::<infosub::cli::CliError>()
                    .map_or(1, |e| e.exit_code());
                ExitCode::from(code as u8)
            }
        },
    }
}
