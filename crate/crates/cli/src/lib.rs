//! Scenario-driven front end for `ermakov-core`.

pub mod commands;
pub mod report;
pub mod scenario;

use std::fmt;

pub use commands::{compare, parse_methods, run, verify, CommandOutput, Method};
pub use report::RunReport;
pub use scenario::{load_scenario, parse_scenario, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CLAIM_FAILED: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Every violation found in the scenario.
    Schema(Vec<String>),
    Runtime(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Runtime(_) | CliError::Io(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(issues) => {
                write!(f, "invalid scenario ({} problem{}):", issues.len(), if issues.len() == 1 { "" } else { "s" })?;
                for issue in issues {
                    write!(f, "\n  - {issue}")?;
                }
                Ok(())
            }
            CliError::Runtime(msg) => write!(f, "runtime error: {msg}"),
            CliError::Io(msg) => write!(f, "cannot write output: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}
