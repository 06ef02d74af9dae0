use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{source_name}:{line}: {msg}")]
    Parse {
        source_name: String,
        line: usize,
        msg: String,
    },
    #[error("duplicate station id {id} (line {line})")]
    DuplicateStation { id: u32, line: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("sites {0} and {1} coincide; deduplicate station locations first")]
    CoincidentSites(usize, usize),
    #[error("cartogram did not converge after {steps} steps (last max displacement {residual:.3e} grid cells)")]
    NoConvergence { steps: usize, residual: f64 },
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("field has zero variance")]
    ZeroVariance,
    #[error("point ({x}, {y}) lies outside the cartogram domain")]
    OutsideDomain { x: f64, y: f64 },
    #[error("GeoJSON error: {0}")]
    GeoJson(#[from] Box<geojson::Error>),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(source_name: &str, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            msg: msg.into(),
        }
    }

    /// True when the error stems from bad or missing input rather than from
    /// a failed computation on valid input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::DuplicateStation { .. }
                | Error::Invalid(_)
                | Error::GeoJson(_)
        )
    }
}

impl From<geojson::Error> for Error {
    fn from(e: geojson::Error) -> Self {
        Error::GeoJson(Box::new(e))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
