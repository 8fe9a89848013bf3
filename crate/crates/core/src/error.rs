use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced anywhere in the fusion pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate entry `{key}` at line {line}")]
    Duplicate { key: String, line: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("residual projection needs a PCA reduction from {from} to {to} dimensions")]
    MissingReduction { from: usize, to: usize },

    #[error("word not in vocabulary: `{0}`")]
    Lookup(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfiguration(Vec<String>),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("no successful configuration in report")]
    NoResult,
}

impl Clone for Error {
    fn clone(&self) -> Self {
        match self {
            Error::Io { path, source } => Error::Io {
                path: path.clone(),
                source: std::io::Error::new(source.kind(), source.to_string()),
            },
            Error::Parse { line, message } => Error::Parse {
                line: *line,
                message: message.clone(),
            },
            Error::Duplicate { key, line } => Error::Duplicate {
                key: key.clone(),
                line: *line,
            },
            Error::EmptyInput(m) => Error::EmptyInput(m.clone()),
            Error::InvalidTable(m) => Error::InvalidTable(m.clone()),
            Error::Alignment(m) => Error::Alignment(m.clone()),
            Error::Dimension(m) => Error::Dimension(m.clone()),
            Error::Numerical(m) => Error::Numerical(m.clone()),
            Error::MissingReduction { from, to } => Error::MissingReduction {
                from: *from,
                to: *to,
            },
            Error::Lookup(m) => Error::Lookup(m.clone()),
            Error::UndefinedCorrelation(m) => Error::UndefinedCorrelation(m.clone()),
            Error::InvalidConfiguration(v) => Error::InvalidConfiguration(v.clone()),
            Error::Grid(m) => Error::Grid(m.clone()),
            Error::NoResult => Error::NoResult,
        }
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
