use thiserror::Error;

/// Failure classes of the runner, each with its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("numerical invariant violated: {0}")]
    Numerical(String),

    #[error("EOC {slope:.4} outside the expected window [{lo}, {hi}]")]
    EocOutsideWindow { slope: f64, lo: f64, hi: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::EocOutsideWindow { .. } => 4,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Prefixes the message, keeping the failure class.
    pub fn context(self, prefix: &str) -> Self {
        match self {
            CliError::Validation(m) => CliError::Validation(format!("{prefix}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{prefix}: {m}")),
            other => other,
        }
    }
}

impl From<advect_core::Error> for CliError {
    fn from(e: advect_core::Error) -> Self {
        match e {
            advect_core::Error::CflViolation { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}
