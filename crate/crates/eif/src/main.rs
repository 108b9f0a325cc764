use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eif::{commands, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "eif", version, about = "Numerical efficient influence functions")]
struct Cli {
    /// Run configuration (`section.key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV; overrides `output.path`. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Echo the parsed configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Secant EIF at `point.x` for one (epsilon, lambda).
    Point,
    /// Secant EIF over the epsilon-lambda grid, with plateau detection.
    Grid,
    /// One-step estimate from observations.
    Onestep {
        /// Headerless numeric CSV, one observation per row.
        #[arg(long)]
        data: PathBuf,
    },
    /// Compare the engine against a closed-form EIF.
    Validate,
    /// Remainder and regularity diagnostics.
    Diagnose,
    /// Sample synthetic observations from the configured distribution.
    DemoData {
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if cli.print_config {
        print!("{}", cfg.to_flat());
        return Ok(());
    }
    let out = cli.out.as_deref();
    match cli.command {
        None => Err(CliError::Config("no subcommand given".into())),
        Some(Command::Point) => commands::point(&cfg, out),
        Some(Command::Grid) => commands::grid(&cfg, out),
        Some(Command::Onestep { data }) => commands::onestep(&cfg, &data, out),
        Some(Command::Validate) => commands::validate(&cfg, out),
        Some(Command::Diagnose) => commands::diagnose(&cfg, out),
        Some(Command::DemoData { seed }) => commands::demo_data(&cfg, seed, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
