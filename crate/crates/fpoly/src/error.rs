use std::path::PathBuf;

/// Every failure the front end can report, each tied to a stable exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Config or input content is invalid. `path` names the offending JSON
    /// key or input line.
    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("refusing to run: {0}")]
    Refused(String),

    #[error("{0}")]
    Core(fpoly_core::Error),
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl ToString) -> Self {
        Self::Config {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for config and input errors, 3 for I/O, 5 for hypothesis refusal.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config { .. } | Self::Input(_) | Self::Core(_) => 2,
            Self::Io { .. } => 3,
            Self::Refused(_) => 5,
        }
    }
}

impl From<fpoly_core::Error> for CliError {
    fn from(e: fpoly_core::Error) -> Self {
        match e {
            fpoly_core::Error::HypothesisRefused(msg) => Self::Refused(msg),
            other => Self::Core(other),
        }
    }
}

/// Attaches a config path to a core validation error.
pub(crate) trait AtPath<T> {
    fn at(self, path: &str) -> Result<T, CliError>;
}

impl<T> AtPath<T> for Result<T, fpoly_core::Error> {
    fn at(self, path: &str) -> Result<T, CliError> {
        self.map_err(|e| match e {
            fpoly_core::Error::HypothesisRefused(msg) => CliError::Refused(msg),
            other => CliError::config(path, other),
        })
    }
}
