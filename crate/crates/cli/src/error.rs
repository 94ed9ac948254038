use std::path::PathBuf;

use thiserror::Error;

use crate::document::DocumentError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Document(#[from] DocumentError),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Compute(#[from] pbn_phi::Error),
}

impl CliError {
    /// Process exit status: 2 for bad input, 3 for failed computations, 4
    /// for size caps.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Input(_) => 2,
            CliError::Document(e) if e.is_size_cap() => 4,
            CliError::Document(_) => 2,
            CliError::Compute(e) if e.is_size_cap() => 4,
            CliError::Compute(e) if is_input_error(e) => 2,
            CliError::Compute(_) => 3,
        }
    }
}

fn is_input_error(e: &pbn_phi::Error) -> bool {
    use pbn_phi::Error::*;
    e.is_validation()
        || matches!(
            e,
            InvalidDistribution(_)
                | DimensionMismatch { .. }
                | InvalidInstant { .. }
                | InvalidTolerance(_)
                | StateOutOfRange { .. }
                | EmptySubset
                | SubsetOutOfRange { .. }
                | SubsetTooSmall { .. }
                | InvalidPartition(_)
        )
}
