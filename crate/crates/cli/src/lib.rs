//! Monte Carlo validation, configuration files and the `aimc-adc` command
//! line for [`aimc_adc_core`].

pub mod commands;
pub mod config;
pub mod format;
pub mod simulator;
pub mod surface;

use std::fmt;

pub use config::{ParseError, RunConfig};
pub use simulator::{delta_imc, simulate_csnr, CircuitParams, Column, SimReport};

/// Failure of a CLI command, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed configuration (exit 2).
    Parse(ParseError),
    /// Unreadable input or unwritable output (exit 2).
    Io(String),
    /// Values that parse but violate a model constraint (exit 3).
    Invalid(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Invalid(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(e) => write!(f, "parse error: {e}"),
            CliError::Io(msg) => write!(f, "{msg}"),
            CliError::Invalid(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Parse(e)
    }
}

impl From<aimc_adc_core::Error> for CliError {
    fn from(e: aimc_adc_core::Error) -> Self {
        match e {
            aimc_adc_core::Error::InvalidParameter(msg) => CliError::Invalid(msg),
        }
    }
}
