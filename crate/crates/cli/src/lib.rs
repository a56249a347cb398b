//! Front end for the `winplan` binary: configuration, data ingest and
//! report rendering. The binary itself only parses arguments and maps
//! errors to exit codes.

pub mod commands;
pub mod config;
pub mod data;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    /// 1 for I/O and parse failures, 2 for validation and infeasibility.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Parse(_) => 1,
            CliError::Validation(_) => 2,
        }
    }
}

impl From<winplan_core::Error> for CliError {
    fn from(e: winplan_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Aligned text table
    Table,
    /// One JSON object per line
    Records,
}
