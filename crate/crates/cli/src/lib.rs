//! Library half of the `linfty-ot` binary. Scenario orchestration lives here
//! so integration tests can drive experiments in-process; `main.rs` is a thin
//! argument-parsing shell around [`scenarios::run_experiment`].

pub mod config;
pub mod report;
pub mod scenarios;

/// Failure modes with distinct exit codes: bad input is not the same thing as
/// a scenario whose built-in assertion did not hold.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable files, schema violations, invalid parameters. Exit 1.
    Config(String),
    /// The experiment ran, wrote its artifacts, and an asserted property
    /// failed. Exit 2; the certificate carries the witness.
    Assertion(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Assertion(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Assertion(msg) => write!(f, "assertion failed: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}
