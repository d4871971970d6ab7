use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0} audit check(s) failed")]
    AuditFailed(usize),
    #[error("{0}")]
    Core(#[from] entanglab::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(entanglab::Error::Capacity { .. }) => 3,
            CliError::AuditFailed(_) => 4,
            _ => 1,
        }
    }
}
