//! Command-line driver: configuration, subcommands and exit codes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

use std::path::Path;

use qnoise_core::{Error, Result};

pub use commands::CommandOutcome;
pub use config::RunConfig;

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fringe,
    Balance,
    Psd,
    PowerScan,
    Qrng,
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_)
        | Error::InvalidLoss { .. }
        | Error::Unbalanceable { .. }
        | Error::Degenerate(_)
        | Error::SegmentTooLong { .. }
        | Error::RatioAboveBound { .. } => EXIT_CONFIG,
        Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
        Error::ZeroVariance | Error::StreamTooShort { .. } | Error::NonFinite(_) => EXIT_NUMERICAL,
        Error::Format(_) | Error::Io(_) => EXIT_IO,
    }
}

/// Runs one subcommand; `seed` overrides `sampler.seed`.
pub fn run(
    command: Command,
    mut cfg: RunConfig,
    out_dir: &Path,
    seed: Option<u64>,
) -> Result<CommandOutcome> {
    if let Some(seed) = seed {
        cfg.sampler.seed = seed;
    }
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    match command {
        Command::Fringe => commands::cmd_fringe(&cfg, out_dir),
        Command::Balance => commands::cmd_balance(&cfg, out_dir),
        Command::Psd => commands::cmd_psd(&cfg, out_dir),
        Command::PowerScan => commands::cmd_power_scan(&cfg, out_dir),
        Command::Qrng => commands::cmd_qrng(&cfg, out_dir),
    }
}
