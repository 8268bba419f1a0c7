//! Config-driven verification runs over fragile-system models.
//!
//! A run loads a JSON [`config::SystemConfig`], executes the experiments
//! behind one [`Command`], and produces a [`report::RunReport`] whose overall
//! flag decides the process exit code.

pub mod config;
pub mod experiments;
pub mod report;
pub mod table;

use serde::Serialize;

pub use config::{load, ConfigError, Overrides, System};
pub use report::RunReport;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Validate,
    FixedPoints,
    Operators,
    Sequential,
    Evolve,
    Chsh,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::FixedPoints => "fixed-points",
            Command::Operators => "operators",
            Command::Sequential => "sequential",
            Command::Evolve => "evolve",
            Command::Chsh => "chsh",
            Command::Report => "report",
        }
    }
}

/// Runs `command` on a validated system.
///
/// `evolve` and `chsh` need the matching config section; `report` skips
/// whichever of them is absent and says so in the warnings.
pub fn run(command: Command, sys: &System) -> Result<RunReport, ConfigError> {
    let mut report = RunReport::new(command, sys.seed, sys.tolerances, sys.warnings.clone());
    let all = command == Command::Report;
    if command == Command::Validate || all {
        report.validate = Some(experiments::validate(sys));
    }
    if command == Command::FixedPoints || all {
        report.fixed_points = Some(experiments::fixed_points(sys));
    }
    if command == Command::Operators || all {
        report.operators = Some(experiments::operators(sys));
    }
    if command == Command::Sequential || all {
        report.sequential = Some(experiments::sequential(sys));
    }
    if command == Command::Evolve || all {
        report.evolve = experiments::evolve(sys);
        if report.evolve.is_none() {
            if !all {
                return Err(ConfigError::new("dynamics", "the evolve command needs a dynamics section"));
            }
            report.warnings.push("dynamics: not configured, evolution skipped".into());
        }
    }
    if command == Command::Chsh || all {
        report.chsh = experiments::chsh_experiment(sys);
        if report.chsh.is_none() {
            if !all {
                return Err(ConfigError::new("bell", "the chsh command needs a bell section"));
            }
            report.warnings.push("bell: not configured, CHSH skipped".into());
        }
    }
    Ok(report.finish())
}

pub fn exit_code(report: &RunReport) -> i32 {
    if report.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
