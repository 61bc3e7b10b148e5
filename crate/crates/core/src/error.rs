use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("probability {0} is outside [0, 1]")]
    Probability(f64),

    #[error("hint {0} is outside [-1/2, 1/2]")]
    Hint(f64),

    #[error("dephasing rate {0} is outside [0, 1]")]
    DephasingRate(f64),

    #[error("phase {0} is not a finite angle")]
    Phase(f64),

    #[error("matrix has a non-finite entry")]
    NonFinite,

    #[error("not a density matrix: {0}")]
    DensityMatrix(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot summarize an empty record set")]
    EmptyRecords,

    #[error("failed to write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
