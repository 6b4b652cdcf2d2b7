//! Scenario harness: validated configuration files in, plot-ready CSV and
//! JSON datasets plus a checksummed manifest out.

pub mod cli;
pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_scenario, validate, Diagnostic, Scenario, ScenarioKind};
pub use output::RunManifest;
pub use run::{run, RunOptions};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid scenario:\n{}", format_diagnostics(.0))]
    Config(Vec<Diagnostic>),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("run failed: {0}")]
    Runtime(String),
}

impl HarnessError {
    /// Process exit code: 2 for configuration errors, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Io(_) | HarnessError::Runtime(_) => 3,
        }
    }
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}
