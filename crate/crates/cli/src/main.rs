//! `rms-sched`: training, benchmarking and ablation studies for the
//! reconfigurable-manufacturing scheduler.

mod commands;
mod error;
mod io;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{bench, breakdown, factorial, plotdata, train, variants};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "rms-sched", version, about = "Scheduling benchmarks for reconfigurable manufacturing systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train the DQN scheduler and write its log and checkpoints.
    Train(train::TrainArgs),
    /// Evaluate policies over scenarios and seeds.
    Bench(bench::BenchArgs),
    /// Negotiation x reconfiguration comparison (WNR, WTR, WNF, WTF).
    Factorial(variants::StudyArgs),
    /// Normal vs machine-breakdown comparison of the four toggle settings.
    Breakdown(variants::StudyArgs),
    /// Long-format CSVs for plotting training curves and results.
    Plotdata(plotdata::PlotArgs),
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let threads = io::thread_cap()?;
    rms_sched::parallel::with_threads(threads, || match &cli.command {
        Command::Train(a) => train::run(a),
        Command::Bench(a) => bench::run(a),
        Command::Factorial(a) => factorial::run(a),
        Command::Breakdown(a) => breakdown::run(a),
        Command::Plotdata(a) => plotdata::run(a),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
