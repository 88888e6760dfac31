use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use log::error;

use qnoise::{exit_code, run, Command, RunConfig, EXIT_CONFIG};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Fringe,
    Balance,
    Psd,
    PowerScan,
    Qrng,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Fringe => Command::Fringe,
            Sub::Balance => Command::Balance,
            Sub::Psd => Command::Psd,
            Sub::PowerScan => Command::PowerScan,
            Sub::Qrng => Command::Qrng,
        }
    }
}

/// Balanced-homodyne quantum noise simulator.
#[derive(Debug, Parser)]
#[command(name = "qnoise", version)]
struct Cli {
    #[arg(value_enum)]
    command: Sub,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Overrides sampler.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Only report errors.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let cfg = match RunConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            error!("{e}");
            eprintln!("qnoise: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run(cli.command.into(), cfg, &cli.out, cli.seed) {
        Ok(outcome) => {
            if !cli.quiet {
                println!("{}", outcome.summary);
                for f in &outcome.files {
                    println!("  wrote {}", f.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qnoise: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
