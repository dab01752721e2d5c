use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type SimResult<T> = std::result::Result<T, SimError>;

impl From<vlc_core::Error> for SimError {
    fn from(e: vlc_core::Error) -> Self {
        match e {
            vlc_core::Error::Config(m) => SimError::Config(m),
            other => SimError::Numerical(other.to_string()),
        }
    }
}

impl SimError {
    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 2,
            SimError::Numerical(_) => 3,
            SimError::Io(_) | SimError::Csv(_) => 1,
        }
    }
}
