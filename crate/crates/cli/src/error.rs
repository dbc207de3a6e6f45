use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const DATA: i32 = 2;
    pub const NON_CONVERGENCE: i32 = 3;
    pub const BOUND_VIOLATED: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: row {row}: {message}")]
    Row { path: PathBuf, row: usize, message: String },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("stability bound violated: {0}")]
    BoundViolated(String),
    #[error(transparent)]
    Core(#[from] stablefair::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use stablefair::Error as E;
        match self {
            CliError::Config(_) | CliError::Toml { .. } => exit::CONFIG,
            CliError::Data(_)
            | CliError::Io { .. }
            | CliError::Row { .. }
            | CliError::Csv { .. }
            | CliError::Json { .. } => exit::DATA,
            CliError::NonConvergence(_) => exit::NON_CONVERGENCE,
            CliError::BoundViolated(_) => exit::BOUND_VIOLATED,
            CliError::Core(e) => match e {
                E::NonConvergence { .. } => exit::NON_CONVERGENCE,
                E::InvalidParameter(_) | E::ZeroLambda | E::NotLinear | E::NotDifferentiable(_) => exit::CONFIG,
                _ => exit::DATA,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
