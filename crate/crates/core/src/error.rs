//! Error types shared across the library.

use std::path::PathBuf;

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A velocity model failed its admissibility checks or produced
    /// non-finite values.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// An argument fell outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An API was called with inconsistent inputs (grid mismatch,
    /// test-function support escaping the window, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// A single explicit step drove the state out of [0, rho_jam] by
    /// more than the slack; callers halve dt and retry.
    #[error("time step dt = {dt:e} drove the state outside [0, rho_jam]")]
    StepRejected { dt: f64 },

    /// The time stepper could not find a stable step within the retry
    /// budget.
    #[error("time step rejected {retries} times at t = {t} (last dt = {dt:e}); state left [0, rho_jam]")]
    CflExhausted { t: f64, dt: f64, retries: u32 },

    /// Configuration document rejected; every violation is listed.
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    /// Filesystem failure, with the offending path.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
