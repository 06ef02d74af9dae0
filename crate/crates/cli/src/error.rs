use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] cdrscope::Error),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for bad input, 3 for a failed computation or unwritable output.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Core(e) if e.is_input_error() => 2,
            _ => 3,
        }
    }

    /// Core I/O errors raised while writing are output failures, not bad
    /// input.
    pub fn writing(e: cdrscope::Error) -> Self {
        match e {
            cdrscope::Error::Io { path, source } => CliError::Output { path, source },
            other => CliError::Core(other),
        }
    }
}
