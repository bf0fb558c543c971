use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use luders_sim::cli::{self, CliError, Command};

#[derive(Parser)]
#[command(
    name = "luders-sim",
    version,
    about = "Simulate and discriminate Lueders and von Neumann measuring devices"
)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// JSON experiment config; defaults reproduce the worked example.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides both the protocol and baseline seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Structured)]
    format: Format,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Search the pointer-parameter grid for orthonormal pointer states.
    SolvePointer,
    /// Run the ancilla circuit on the configured input.
    Simulate,
    /// Classify the configured device as a black box.
    Discriminate,
    /// Fidelity, correlation and null baseline.
    ReportMetrics,
}

#[derive(ValueEnum, Clone, Copy)]
enum Format {
    Human,
    Structured,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let mut config = cli::load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config = config.with_seed(seed);
    }
    let command = match args.command {
        Cmd::SolvePointer => Command::SolvePointer,
        Cmd::Simulate => Command::Simulate,
        Cmd::Discriminate => Command::Discriminate,
        Cmd::ReportMetrics => Command::ReportMetrics,
    };
    let report = cli::run(command, &config)?;
    let text = match args.format {
        Format::Human => cli::to_human(&report),
        Format::Structured => cli::to_structured(&report),
    };
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
