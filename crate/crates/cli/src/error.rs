use serde::Serialize;
use thiserror::Error;

/// Failure classes, each with its own exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    /// Bad price file; `row` is the 1-based line number, header included.
    #[error("{file}{}: {message}", row.map(|r| format!(" line {r}")).unwrap_or_default())]
    Input {
        file: String,
        row: Option<usize>,
        message: String,
    },

    #[error("model rejected: {0}")]
    Model(String),

    #[error("{0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Input { .. } => "input",
            CliError::Model(_) => "model",
            CliError::Numerical(_) => "numerical",
            CliError::Io { .. } => "io",
        }
    }

    /// 2 is left to argument parsing.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::Input { .. } => 4,
            CliError::Model(_) => 5,
            CliError::Numerical(_) => 6,
            CliError::Io { .. } => 7,
        }
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            message: String,
        }
        serde_json::to_string(&Line {
            error: self.class(),
            message: self.to_string(),
        })
        .unwrap_or_else(|_| self.to_string())
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<qhedge::Error> for CliError {
    fn from(e: qhedge::Error) -> Self {
        use qhedge::Error as E;
        match e {
            E::Validation(_) => CliError::Model(e.to_string()),
            E::Spec(_) => CliError::Config(e.to_string()),
            E::InvalidPath(_) | E::InsufficientData(_) => CliError::Input {
                file: "observed path".into(),
                row: None,
                message: e.to_string(),
            },
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
