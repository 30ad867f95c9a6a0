use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pastq_cli::config::LoadedConfig;
use pastq_cli::error::CliError;
use pastq_cli::{execute, Command};

#[derive(Parser)]
#[command(
    name = "pastq",
    version,
    about = "Past quantum state retrodiction simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Unconditioned outcome probability versus θ.
    Fig1c(Args),
    /// Post-selected outcome probability over θ × E00 bins.
    Fig3(Args),
    /// Post-selected outcome probability against both predictions.
    Fig4(Args),
    /// Master-equation curves and a backward effect trajectory.
    Dynamics(Args),
    /// Runs the invariant suite; exits with status 3 on failure.
    Selftest(Args),
}

#[derive(clap::Args)]
struct Args {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides experiment.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides experiment.shots.
    #[arg(long)]
    shots: Option<u64>,
}

fn run(command: Command, args: &Args) -> Result<(), CliError> {
    let mut loaded = match &args.config {
        Some(path) => LoadedConfig::from_path(path)?,
        None => LoadedConfig::defaults(),
    };
    if let Some(seed) = args.seed {
        loaded.config.experiment.seed = seed;
    }
    if let Some(shots) = args.shots {
        loaded.config.experiment.shots = shots;
    }
    let (text, output) = execute(command, &loaded)?;
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    match &args.out {
        Some(path) => fs::write(path, &text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    if output.failed > 0 {
        return Err(CliError::SelftestFailed {
            failed: output.failed,
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (command, args) = match &cli.command {
        Cmd::Fig1c(a) => (Command::Fig1c, a),
        Cmd::Fig3(a) => (Command::Fig3, a),
        Cmd::Fig4(a) => (Command::Fig4, a),
        Cmd::Dynamics(a) => (Command::Dynamics, a),
        Cmd::Selftest(a) => (Command::Selftest, a),
    };
    match run(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
