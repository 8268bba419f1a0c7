use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fragile_cli::{exit_code, load, run, table, Command, Overrides, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "fragile", version, about = "Verify operator-formalism reconstructions of fragile hidden-variable systems")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Schema and invariant checks only
    Validate(RunArgs),
    /// Fixed-point residuals of every kernel against its observable
    FixedPoints(RunArgs),
    /// Transfer and observable matrices, spectra, commutators, trace rule
    Operators(RunArgs),
    /// Order dependence of sequential measurements
    Sequential(RunArgs),
    /// Propagator unitarity, generator round trip, density transport
    Evolve(RunArgs),
    /// Correlations, CHSH value and grid scan
    Chsh(RunArgs),
    /// Everything above
    Report(RunArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Table,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// System definition (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Base seed for randomized entries without their own seed
    #[arg(long)]
    seed: Option<u64>,
    /// Replace every tolerance with this value
    #[arg(long)]
    tol: Option<f64>,
    /// Format written to standard output
    #[arg(long, value_enum, default_value_t = Output::Table)]
    output: Output,
    /// Also write the JSON report to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

fn usage_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_USAGE as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let (command, args) = match cli.command {
        Sub::Validate(a) => (Command::Validate, a),
        Sub::FixedPoints(a) => (Command::FixedPoints, a),
        Sub::Operators(a) => (Command::Operators, a),
        Sub::Sequential(a) => (Command::Sequential, a),
        Sub::Evolve(a) => (Command::Evolve, a),
        Sub::Chsh(a) => (Command::Chsh, a),
        Sub::Report(a) => (Command::Report, a),
    };
    let overrides = Overrides {
        seed: args.seed,
        tol: args.tol,
    };
    let report = match load(&args.config, overrides).and_then(|sys| run(command, &sys)) {
        Ok(report) => report,
        Err(e) => return usage_error(e),
    };

    let json = report.to_json();
    if let Some(path) = &args.out {
        if let Err(e) = fs::write(path, &json) {
            return usage_error(format!("`--out`: cannot write {}: {e}", path.display()));
        }
    }
    match args.output {
        Output::Table => print!("{}", table::render(&report)),
        Output::Json => print!("{json}"),
    }
    ExitCode::from(exit_code(&report) as u8)
}
