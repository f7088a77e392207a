use std::path::PathBuf;

/// Errors from configuration, file formats and experiment runs.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownName {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("invalid {name} = {value}: expected {expected}")]
    InvalidRange {
        name: String,
        value: String,
        expected: String,
    },

    #[error("missing `{0}` in config")]
    Missing(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(#[from] toml::de::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unknown metric `{name}` (available: {available})")]
    UnknownMetric { name: String, available: String },

    #[error("grid: {0}")]
    Grid(String),

    #[error("non-finite metric: {0}")]
    NonFinite(String),

    #[error(transparent)]
    Core(#[from] tdrl_core::Error),
}

impl HarnessError {
    /// Process exit code: 2 for unknown names, 3 for out-of-range values,
    /// 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::UnknownName { .. } => 2,
            HarnessError::InvalidRange { .. } => 3,
            HarnessError::Core(tdrl_core::Error::InvalidParameter { .. }) => 3,
            _ => 1,
        }
    }

    pub(crate) fn range(name: &str, value: impl ToString, expected: &str) -> Self {
        HarnessError::InvalidRange {
            name: name.to_string(),
            value: value.to_string(),
            expected: expected.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
