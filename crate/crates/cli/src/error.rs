use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration (exit code 2).
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] sgeo_core::SgeoError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}
