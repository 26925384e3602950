use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    #[error("invalid input: {0}")]
    Input(String),

    /// The target density cannot produce a value at the requested point.
    #[error("domain error: {0}")]
    Domain(String),

    /// Sample spread is zero, so no data-driven bandwidth exists.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("score at data point {index} is not finite")]
    Shift { index: usize },

    #[error("KL divergence is infinite: estimate vanishes where the truth has mass ({0})")]
    Divergence(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the `sdkde` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            _ => 1,
        }
    }
}

pub(crate) fn ensure_finite(x: &[f64]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::input(format!("non-finite coordinate in {x:?}")))
    }
}
