//! `tactile`: acquisition, reconstruction and classification experiments on
//! simulated or recorded tactile streams.

mod commands;
mod scene;
mod support;

use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::{acquire, bench, classify, dict, metrics, recon};

/// Environment variable holding the default worker thread count.
const THREADS_ENV: &str = "TACTILE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "tactile", version, about = "Compressive tactile subsampling toolkit")]
struct Cli {
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Learn a patch dictionary from frame streams with K-SVD.
    TrainDict(dict::TrainDictArgs),
    /// Write an analytic DCT or Haar dictionary.
    GenDict(dict::GenDictArgs),
    /// Render a scene file to a frame stream.
    Simulate(acquire::SimulateArgs),
    /// Subsample a scene or recorded stream.
    Sample(acquire::SampleArgs),
    /// Reconstruct full frames from measurements.
    Reconstruct(recon::ReconstructArgs),
    /// Classify measurements against an object library.
    Classify(classify::ClassifyArgs),
    /// Run the accuracy, frame-rate and support campaign.
    Bench(bench::BenchArgs),
    /// Per-frame force, COP and contact statistics.
    Metrics(metrics::MetricsArgs),
}

fn init_threads(threads: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| support::usage(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    init_threads(cli.threads)?;
    match cli.command {
        Command::TrainDict(a) => dict::train_dict(&a),
        Command::GenDict(a) => dict::gen_dict(&a),
        Command::Simulate(a) => acquire::simulate(&a),
        Command::Sample(a) => acquire::sample(&a),
        Command::Reconstruct(a) => recon::reconstruct(&a),
        Command::Classify(a) => classify::classify(&a),
        Command::Bench(a) => bench::bench(&a),
        Command::Metrics(a) => metrics::metrics(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(support::exit_code(&e) as u8)
        }
    }
}
