use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use grect::commands::{run, Options};
use grect::config::Command;

/// Recursive certainty equivalents under ambiguity.
#[derive(Parser)]
#[command(name = "grect", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "./out")]
    out: PathBuf,
    /// Seed for randomized commands; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the human summary on stdout.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = Options { command: cli.command, config: cli.config, out: cli.out, seed: cli.seed };
    match run(&opts) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if !cli.quiet {
                for line in &outcome.lines {
                    println!("{line}");
                }
            }
            ExitCode::from(outcome.status as u8)
        }
        Err(e) => {
            eprintln!("error: {}: {e}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
