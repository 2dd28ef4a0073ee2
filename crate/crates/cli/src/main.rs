use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cfh_cli::{check_threads_env, exit_code, run, Command, EXIT_USAGE};

/// Leaf tracing and hypersurface reconstruction on the conformally flat variety.
#[derive(Parser)]
#[command(name = "cfh", version)]
struct Cli {
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    if let Err(e) = check_threads_env() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    match run(cli.command, &cli.config, &cli.out) {
        Ok(outcome) => {
            for p in &outcome.written {
                println!("wrote {}", p.display());
            }
            for line in &outcome.summary {
                println!("{line}");
            }
            if !outcome.failures.is_empty() {
                eprintln!("assertion failed: {}", outcome.failures.join(", "));
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
