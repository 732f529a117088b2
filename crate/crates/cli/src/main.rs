//! `peh`: command-line front end for the harvester model and design pipeline.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical failure, 4 partial completion.

mod commands;
mod pipeline;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use settings::{ConfigArgs, Settings};

#[derive(Debug, Parser)]
#[command(name = "peh", version, about = "Piezoelectric plate harvester modeling and design")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,

    /// Worker threads (default: configuration, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, env = "PEH_OUT_DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Voltage and power frequency response of one design.
    Frf(commands::FrfArgs),
    /// Time-domain response to a base-acceleration record.
    Simulate(commands::SimulateArgs),
    /// Two-parameter design sweep of the power peak and optimal load.
    Sweep(commands::SweepArgs),
    /// Threshold-triggered event windows (and quiet windows) from a record.
    ExtractEvents(commands::ExtractArgs),
    /// Per-event design optimization and cross-event energies.
    Optimize(pipeline::OptimizeArgs),
    /// Clustering of the optimal designs into candidates.
    Cluster(pipeline::RunArgs),
    /// Occurrence-weighted and long-record evaluation of the candidates.
    Evaluate(pipeline::EvaluateArgs),
}

/// Successful termination, possibly with part of the work missing.
pub enum Outcome {
    Done,
    Partial(String),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Partial(msg)) => {
            eprintln!("partial completion: {msg}");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}

fn run(cli: Cli) -> peh_core::Result<Outcome> {
    // run-directory commands read their stored settings instead
    let settings = match &cli.command {
        Command::Cluster(_) | Command::Evaluate(_) => None,
        _ => Some(Settings::load(&cli.config)?),
    };
    let threads = cli
        .threads
        .or(settings.as_ref().map(|s| s.config.threads))
        .unwrap_or(0);
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            log::warn!("thread pool already initialized: {e}");
        }
    }
    let out = cli
        .out
        .clone()
        .or_else(|| settings.as_ref().and_then(|s| s.config.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."));
    match (&cli.command, settings) {
        (Command::Frf(a), Some(s)) => commands::cmd_frf(&s, &out, a),
        (Command::Simulate(a), Some(s)) => commands::cmd_simulate(&s, &out, a),
        (Command::Sweep(a), Some(s)) => commands::cmd_sweep(&s, &out, a),
        (Command::ExtractEvents(a), Some(s)) => commands::cmd_extract(&s, &out, a),
        (Command::Optimize(a), Some(s)) => pipeline::cmd_optimize(&s, &out, a),
        (Command::Cluster(a), _) => pipeline::cmd_cluster(a),
        (Command::Evaluate(a), _) => pipeline::cmd_evaluate(a),
        _ => unreachable!("settings are loaded for every single-device command"),
    }
}
