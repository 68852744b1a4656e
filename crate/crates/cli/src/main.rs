use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qhedge_cli::{run, CliError, Command, Overrides};

/// Quadratic hedging of calls on exponential Lévy models.
#[derive(Debug, Parser)]
#[command(name = "qhedge", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Run config (.toml or .json), or a manifest from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte Carlo seed; overrides `mc.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = Overrides {
        out: args.out,
        seed: args.seed,
        threads: args.threads,
    };
    match run(args.command, &args.config, &overrides) {
        Ok(summary) => {
            print!("{}", summary.stdout);
            if summary.model_ok == Some(false) {
                let e = CliError::Model("the model fails the standing assumptions; see validation.json".into());
                eprintln!("{}", e.to_json());
                return ExitCode::from(e.exit_code() as u8);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
