//! Batch front end for the sgk toolkit: configuration parsing, command
//! execution and machine-readable output.

pub mod config;
pub mod execute;
pub mod output;
pub mod verify;

use thiserror::Error;

pub use config::{parse_config, Command, RunConfig, FORMAT_VERSION};
pub use execute::execute;
use output::Record;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {}", .0.join("; "))]
    Schema(Vec<String>),

    #[error(transparent)]
    Core(#[from] sgk_core::Error),

    #[error("adiabaticity breached at t = {t}: epsilon = {epsilon}")]
    Adiabaticity { t: f64, epsilon: f64, step: usize },

    #[error("verification failed: {failed} of {total} checks")]
    Verify { failed: usize, total: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Core(sgk_core::Error::InvalidInput(_) | sgk_core::Error::Step(_)) => 2,
            CliError::Core(e) if e.is_physical() => 3,
            CliError::Adiabaticity { .. } => 4,
            _ => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Schema(_) => "SchemaError",
            CliError::Core(e) => e.kind(),
            CliError::Adiabaticity { .. } => "AdiabaticityBreach",
            CliError::Verify { .. } => "VerificationFailed",
            CliError::Io(_) => "IoError",
        }
    }

    /// Single-line JSON payload written to stderr.
    pub fn payload(&self) -> String {
        let mut rec = Record::new("error")
            .str("error", self.kind())
            .int("exit_code", self.exit_code())
            .str("message", &self.to_string());
        match self {
            CliError::Schema(v) => rec = rec.strs("violations", v),
            CliError::Core(sgk_core::Error::Trajectory { step, .. }) => rec = rec.int("step", *step as u64),
            CliError::Adiabaticity { t, epsilon, step } => {
                rec = rec.int("step", *step as u64).num("t", *t).num("epsilon", *epsilon)
            }
            _ => {}
        }
        rec.finish()
    }
}
