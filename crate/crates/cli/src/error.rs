use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("unknown key {key:?} for `{command}`")]
    UnknownKey { key: String, command: &'static str },

    #[error("missing required key {key:?} for `{command}`")]
    Missing { key: String, command: &'static str },

    #[error("bad value for {key:?}: {msg}")]
    Value { key: String, msg: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] nlcap::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
