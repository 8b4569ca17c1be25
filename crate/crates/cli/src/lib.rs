//! Command-line driver: reads a JSON run configuration, evaluates one mode
//! and writes a CSV table plus a JSON sidecar holding the resolved config.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod run;

use std::path::PathBuf;

pub use config::{parse_config, Mode, RunConfig};
pub use run::{execute, render_csv, sidecar_path, write_outputs, Table};

/// Environment variable consulted when `--threads` is absent.
pub const THREADS_ENV: &str = "CASIMIR_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] casimir_core::Error),
    #[error("non-finite {column} in results: {value}")]
    NonFinite { column: &'static str, value: f64 },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 1 for I/O, 2 for configuration errors, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        use casimir_core::Error as E;
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(E::InvalidParameter { .. } | E::Rotations) => 2,
            CliError::Numerical(_) | CliError::NonFinite { .. } => 3,
        }
    }
}
