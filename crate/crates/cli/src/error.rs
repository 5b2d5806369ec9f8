use thiserror::Error;

/// Errors surfaced by the experiment runner.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown experiment '{0}'")]
    UnknownExperiment(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: symlab_core::Error,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl From<symlab_core::Error> for CliError {
    fn from(e: symlab_core::Error) -> Self {
        match e {
            symlab_core::Error::Config(m) => CliError::Config(m),
            e => CliError::Core { context: "simulation".into(), source: e },
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Adds context to core errors.
pub trait Context<T> {
    fn context(self, what: impl Into<String>) -> Result<T>;
}

impl<T> Context<T> for std::result::Result<T, symlab_core::Error> {
    fn context(self, what: impl Into<String>) -> Result<T> {
        self.map_err(|source| match source {
            symlab_core::Error::Config(m) => CliError::Config(format!("{}: {m}", what.into())),
            source => CliError::Core { context: what.into(), source },
        })
    }
}
