use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("ingestion: {0}")]
    Ingest(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error(transparent)]
    Core(#[from] lipfit::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 1 for usage and ingestion problems, 2 for infeasible or degenerate input.
    pub fn exit_code(&self) -> u8 {
        use lipfit::Error as E;
        match self {
            CliError::Usage(_) | CliError::Ingest(_) | CliError::Io(_) => 1,
            CliError::Core(E::Input(_) | E::Config(_) | E::Domain { .. }) => 1,
            CliError::Core(_) => 2,
        }
    }
}
