use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use discosim::cli;

#[derive(Parser)]
#[command(name = "discosim", about = "Discontinuity inference under adversarial smoothing", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Master seed (defaults to the config's seed, then 42)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 means all available
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run a built-in benchmark: rdd, rkd, bunching or metrics
    Demo { scenario: String },
    /// Run an experiment described by a config file
    Run { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Demo { scenario } => {
            cli::cmd_demo(scenario, &cli.out, cli.seed.unwrap_or(42), cli.jobs)
        }
        Command::Run { config } => cli::cmd_run(config, &cli.out, cli.seed, cli.jobs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code as u8)
        }
    }
}
