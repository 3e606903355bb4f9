//! Command-line driver for the `starmul` library: declarative scenario runs,
//! a built-in worked example, and a seeded, replayable property suite.
//!
//! A scenario is a JSON document naming a finite measure space, a partition,
//! a Young function, a multiplier, and a list of checks; running it yields a
//! machine-readable report with one entry per check.  The binary exits 0 when
//! every check passes, 1 when any check fails, and 2 when the input cannot
//! be parsed or validated.

use std::fmt;

pub mod checks;
pub mod props;
pub mod report;
pub mod scenario;

pub use checks::{example_paper, example_scenario, run_scenario};
pub use props::{
    run_suite, CaseInstance, Failure, InvariantOutcome, SuiteOutcome,
    CONDITIONAL_EXPECTATION_SUITE, PROPS_SCHEMA,
};
pub use report::{CheckResult, Report, REPORT_SCHEMA};
pub use scenario::{
    CheckSpec, Expression, GridInfo, Instance, MultiplierSpec, PartitionName, PartitionSpec,
    Scenario, SpaceSpec, YoungSpec,
};

/// Errors that make a run impossible before any check executes.
#[derive(Debug)]
pub enum CliError {
    /// The scenario (or command line) is malformed or inconsistent.
    Parse(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<starmul::Error> for CliError {
    fn from(e: starmul::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}
