use thiserror::Error;

/// Harness errors, grouped into exit-code categories.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Io(_) => 4,
            CliError::Numerical(_) => 5,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
            CliError::Io(_) => "io",
            CliError::Numerical(_) => "numerical",
        }
    }
}

impl From<rspd::Error> for CliError {
    fn from(err: rspd::Error) -> Self {
        match err {
            rspd::Error::Config(m) => CliError::Config(vec![m]),
            rspd::Error::InvalidAccuracy(m) => CliError::Config(vec![m]),
            rspd::Error::Parse { .. } | rspd::Error::Degenerate(_) => {
                CliError::Data(err.to_string())
            }
            rspd::Error::Io(e) => CliError::Io(e.to_string()),
            rspd::Error::Numerical { .. } => CliError::Numerical(err.to_string()),
        }
    }
}
