use std::path::PathBuf;

use thiserror::Error;

/// Failure of a CLI run, mapped onto the documented exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{kernel} failed for {inputs}: {source}")]
    Numerical {
        kernel: &'static str,
        inputs: String,
        #[source]
        source: dptom_core::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical { source, .. } if !source.is_config() => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Wraps a core error with the kernel name and the inputs it ran on.
pub fn kernel<D: std::fmt::Display>(name: &'static str, inputs: D) -> impl FnOnce(dptom_core::Error) -> CliError {
    move |source| CliError::Numerical { kernel: name, inputs: inputs.to_string(), source }
}

pub fn config<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}
