//! `comfort`: ingestion, PMV scoring, source training, transfer and the
//! evaluation suites from one binary.
//!
//! Exit codes: 0 success, 1 missing input or runtime failure, 2 usage
//! error, 3 internal invariant breach (data leak, transfer contract).

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use comfort_core::Error;

#[derive(Parser, Debug)]
#[command(name = "comfort", version, about = "Thermal sensation modeling with climate-aware transfer learning")]
struct Cli {
    /// Output directory for artifacts.
    #[arg(long, global = true, env = "COMFORT_OUT", default_value = "comfort-out")]
    out: PathBuf,
    /// Worker threads for folds, trees and sweep points.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load a survey CSV into the canonical layout.
    Ingest(commands::IngestArgs),
    /// Per-feature and per-class statistics of a dataset.
    Summarize(commands::SummarizeArgs),
    /// Score one condition with the PMV model.
    Pmv(commands::PmvArgs),
    /// Train a source model on pooled HVAC records.
    TrainSource(commands::TrainSourceArgs),
    /// Fine-tune a saved source model on a target dataset.
    Transfer(commands::TransferArgs),
    /// k-fold evaluation of one algorithm.
    Evaluate(commands::EvaluateArgs),
    /// Feature-set comparison over Xa, Xb and Xc.
    Ablation(commands::AblationArgs),
    /// Hidden-depth sweep of the transfer model.
    Sweep(commands::SweepArgs),
    /// Write a synthetic multi-city scenario, optionally scoring the three MLP variants on it.
    Synth(commands::SynthArgs),
}

/// Flags shared by every training command.
#[derive(Args, Debug, Clone)]
pub struct TrainFlags {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    #[arg(long, default_value_t = 200)]
    pub batch: usize,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    /// Comma-separated hidden widths.
    #[arg(long, default_value = "64,64", value_delimiter = ',')]
    pub hidden: Vec<usize>,
    /// none | interp | gan
    #[arg(long, default_value = "interp")]
    pub resampler: String,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Leak(_) | Error::TransferContract(_)) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.max(1))
        .build_global()
    {
        eprintln!("comfort: {e}");
        return ExitCode::from(1);
    }
    let result = std::fs::create_dir_all(&cli.out)
        .map_err(anyhow::Error::from)
        .and_then(|_| match &cli.command {
            Command::Ingest(a) => commands::ingest(a, &cli.out),
            Command::Summarize(a) => commands::summarize(a, &cli.out),
            Command::Pmv(a) => commands::pmv(a, &cli.out),
            Command::TrainSource(a) => commands::train_source(a, &cli.out),
            Command::Transfer(a) => commands::transfer(a, &cli.out),
            Command::Evaluate(a) => commands::evaluate(a, &cli.out),
            Command::Ablation(a) => commands::ablation(a, &cli.out),
            Command::Sweep(a) => commands::sweep(a, &cli.out),
            Command::Synth(a) => commands::synth(a, &cli.out),
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("comfort: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
