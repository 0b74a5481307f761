use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation
    /// (invalid spin labels, triangle violations, out-of-range lattice
    /// indices, non-normalized inputs).
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or unsatisfiable configuration (shape mismatches,
    /// malformed config files, violated preset constraints).
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical routine failed to meet its accuracy contract.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A requested coupling cannot be realized by any waveguide spacing.
    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),

    /// File-system failure, with the offending path attached.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for CLI front ends: 2 configuration, 3 numerical,
    /// 4 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config(_) | Error::InfeasibleGeometry(_) => 2,
            Error::Numerical(_) => 3,
            Error::Io { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
