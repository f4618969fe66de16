use ifsproj_core::{ErrorClass, IfsError};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_HYPOTHESIS: i32 = 4;
pub const EXIT_NUMERIC: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("usage: {0}")]
    Usage(String),
    #[error("{}", describe(.0))]
    Core(#[from] IfsError),
}

fn describe(e: &IfsError) -> String {
    match e {
        IfsError::InfiniteGroup { .. } => format!(
            "{e}; the projection construction needs the group generated by the \
             rotation parts to be finite"
        ),
        _ => e.to_string(),
    }
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) | CliError::Io { .. } | CliError::Usage(_) => EXIT_SCHEMA,
            CliError::Core(e) => match e.class() {
                ErrorClass::Invalid => EXIT_SCHEMA,
                ErrorClass::Degenerate => EXIT_DEGENERATE,
                ErrorClass::Hypothesis => EXIT_HYPOTHESIS,
                ErrorClass::Numeric => EXIT_NUMERIC,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
