use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("{0}")]
    Core(#[from] chaining_core::Error),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Hint printed after resource-cap failures.
    pub fn guidance(&self) -> Option<&'static str> {
        match self {
            CliError::Core(chaining_core::Error::Resource(_)) => {
                Some("exact mode enumerates partitions and is capped at 10 points; rerun with --mode greedy")
            }
            _ => None,
        }
    }
}
