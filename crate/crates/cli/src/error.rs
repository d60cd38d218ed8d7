use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Core(#[from] msqg::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = Result<T, CliError>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use msqg::Error as E;
        match self {
            CliError::Usage(_) | CliError::Toml(_) => EXIT_USAGE,
            CliError::Core(
                E::InvalidAlpha(..)
                | E::GridTooCoarse { .. }
                | E::TruncationTooSmall(_)
                | E::InvalidParameter(_)
                | E::EmptyRegion(_),
            ) => EXIT_USAGE,
            _ => EXIT_FAIL,
        }
    }
}
