//! Standard-library companion of `randflight-core`: parallel batches,
//! CSV/JSON output, goodness-of-fit statistics, verification suites and the
//! command-line front end.

pub mod batch;
pub mod cli;
pub mod io;
pub mod stats;
pub mod verify;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] randflight_core::Error),
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("JSON encoding failed: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const IO: i32 = 3;
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        use randflight_core::Error as E;
        match self {
            Error::Config(_) => exit::CONFIG,
            Error::Io { .. } | Error::Json(_) => exit::IO,
            Error::Core(E::InvalidParameter(_) | E::InvalidModel(_) | E::Domain { .. } | E::Grid(_) | E::GammaPole(_)) => {
                exit::CONFIG
            }
            Error::Core(_) => exit::VERIFY_FAILED,
        }
    }
}
