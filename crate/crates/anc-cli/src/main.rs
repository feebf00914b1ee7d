//! `anc` - synthesize scenarios, denoise them, compare algorithms, beamform.
//!
//! Exit codes: 0 success, 2 configuration/argument error, 3 I/O or data
//! error, 4 numeric error.

mod commands;
mod manifest;
mod report;

use anc::Error;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "anc", version, about = "Adaptive noise cancellation workbench")]
struct Cli {
    /// Master seed override (takes precedence over the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for all output files (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Shared key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Pace the streaming pipeline at the real-time rate instead of running
    /// as fast as possible.
    #[arg(long, global = true)]
    paced: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a scenario: clean.wav, reference.wav, primary.wav.
    Synth,
    /// Run one adaptive filter over a scenario directory.
    Denoise {
        /// Directory holding clean.wav, reference.wav, primary.wav.
        scenario_dir: PathBuf,
        /// Filter to run: lms | nlms | rls | lms-q15.
        #[arg(long)]
        algo: String,
    },
    /// Run every filter and optimizer over a scenario and tabulate
    /// convergence, SNR, and runtime.
    Compare {
        scenario_dir: PathBuf,
    },
    /// Delay-and-sum beamform a set of equal-length mono WAV files.
    Beamform {
        /// One mono WAV per microphone, in array order.
        channels: Vec<PathBuf>,
        /// Ground-truth clean WAV; enables SNR-gain measurement.
        #[arg(long)]
        clean: Option<PathBuf>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config { .. } | Error::Argument(_) | Error::EmptyInput(_) | Error::Range(_) => 2,
        Error::Io(_) | Error::Format(_) | Error::Unsupported(_) | Error::Data(_) => 3,
        Error::Numeric(_)
        | Error::NumericAt { .. }
        | Error::UndefinedReference
        | Error::NoConvergence => 4,
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => match anc::config::Config::from_file(path) {
            Ok(cfg) => cfg,
            Err(err) => {
                eprintln!("error: {err}");
                return ExitCode::from(exit_code_for(&err));
            }
        },
        None => anc::config::Config::default(),
    };

    let ctx = commands::Context {
        argv,
        config,
        seed_override: cli.seed,
        out_dir: cli.out_dir.clone(),
        paced: cli.paced,
    };

    let result = match &cli.command {
        Command::Synth => commands::cmd_synth(&ctx),
        Command::Denoise { scenario_dir, algo } => {
            commands::cmd_denoise(&ctx, scenario_dir, algo)
        }
        Command::Compare { scenario_dir } => commands::cmd_compare(&ctx, scenario_dir),
        Command::Beamform { channels, clean } => {
            commands::cmd_beamform(&ctx, channels, clean.as_deref())
        }
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
