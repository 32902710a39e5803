use std::path::PathBuf;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const ASSERTION: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const INSTABILITY: i32 = 3;
    pub const HORIZON: i32 = 4;
    pub const IO: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("{0}")]
    Core(#[from] gmns_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Format(String),
}

impl AppError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Config { field: field.into(), reason: reason.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config { .. } => exit::CONFIG,
            AppError::Core(gmns_core::Error::Unstable { .. }) => exit::INSTABILITY,
            AppError::Core(gmns_core::Error::Format(_)) => exit::IO,
            AppError::Core(_) => exit::CONFIG,
            AppError::Io { .. } | AppError::Format(_) => exit::IO,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
