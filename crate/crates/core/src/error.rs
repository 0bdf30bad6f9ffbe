use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library. Each variant maps onto either a
/// configuration failure or a numerical failure (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix data has {got} entries, expected {rows}x{cols}")]
    InvalidData {
        rows: usize,
        cols: usize,
        got: usize,
    },

    #[error(
        "singular system: eigenvalue ratio {ratio:e} is below the rank threshold {threshold:e}"
    )]
    Singular { ratio: f64, threshold: f64 },

    #[error("Jacobi eigenvalue iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("row {0} has zero norm")]
    ZeroRow(usize),

    #[error("all sampling weights are zero")]
    EmptyDistribution,

    #[error("invalid linear system: {0}")]
    InvalidSystem(String),

    #[error("bound is vacuous: contraction factor {0} is not below 1")]
    VacuousBound(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code used by the CLI: 3 for numerical failures, 2 for
    /// everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Singular { .. }
            | Error::NoConvergence { .. }
            | Error::ZeroRow(_)
            | Error::EmptyDistribution
            | Error::VacuousBound(_) => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
