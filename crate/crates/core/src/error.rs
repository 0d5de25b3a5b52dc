use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{field} = {value:#x} does not fit in {bits} bits")]
    FieldWidth {
        field: &'static str,
        value: u64,
        bits: u32,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    TraceParse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("cannot compare reports: {0}")]
    Compare(String),

    #[error("MPKI is undefined for zero instructions")]
    ZeroInstructions,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
