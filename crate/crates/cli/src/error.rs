use std::path::PathBuf;

use instnet_testkit::KitError;
use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] instnet::Error),

    #[error("generator: {0}")]
    Generator(#[from] KitError),

    #[error("cannot read {}: {source}", path.display())]
    Input {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),
}

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const RUNTIME: i32 = 2;
    pub const CONVERGENCE: i32 = 3;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use instnet::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::Parse { .. }
                | E::Validation(_)
                | E::Config(_)
                | E::Argument(_)
                | E::EmptySample
                | E::InsufficientData { .. } => exit::VALIDATION,
                E::Convergence { .. } => exit::CONVERGENCE,
                E::UndefinedStatistic(_) | E::FitDegenerate(_) | E::Io(_) | E::Json(_) => {
                    exit::RUNTIME
                }
            },
            CliError::Generator(_) | CliError::Input { .. } | CliError::Usage(_) => {
                exit::VALIDATION
            }
            CliError::Output { .. } => exit::RUNTIME,
        }
    }
}
