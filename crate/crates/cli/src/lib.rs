//! Configuration, execution and result emission for the `recmwpm` binary.

pub mod config;
pub mod output;
pub mod run;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<recmwpm::experiment::ExperimentError> for CliError {
    fn from(e: recmwpm::experiment::ExperimentError) -> Self {
        use recmwpm::experiment::ExperimentError as E;
        match e {
            E::Bracket { .. } | E::NoCrossing | E::TooFewSuccesses { .. } => CliError::Numerical(e.to_string()),
            E::Noise(recmwpm::noise::NoiseError::Io(_)) => CliError::Io(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
