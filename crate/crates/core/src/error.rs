use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigensolver did not converge for a {0}x{0} matrix")]
    EigenNoConvergence(usize),

    #[error("all-zero state has no inverse participation ratio")]
    ZeroState,

    #[error("state is not normalized (|norm^2 - 1| = {deviation:e})")]
    Unnormalized { deviation: f64 },

    #[error("no clear cluster structure: largest gaps {largest:e} and {second:e} are below {factor} x median spacing {median:e}")]
    NoClusterStructure {
        largest: f64,
        second: f64,
        median: f64,
        factor: f64,
    },

    #[error("no transition in range [{lo}, {hi}]")]
    NoTransition { lo: f64, hi: f64 },

    #[error("no {side} edge mode inside the channel gap at phi = {phi}")]
    MissingEdgeMode { side: &'static str, phi: f64 },

    #[error("channel level never behaves as a bulk state on the supplied phase grid")]
    EmptyBulkInterval,

    #[error("norm drift {drift:e} exceeds tolerance at t = {time} (dt = {dt})")]
    NormDrift { drift: f64, time: f64, dt: f64 },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("usage: {0}")]
    Usage(String),

    /// Argument parsing failure, or a `--help` / `--version` request.
    #[error("{0}")]
    Cli(#[from] clap::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error class: 1 usage, 2 numerical, 3 I/O.
    /// Help and version requests map to 0.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Cli(e) if !e.use_stderr() => 0,
            Error::InvalidParameter(_) | Error::Usage(_) | Error::Cli(_) => 1,
            Error::Io { .. } | Error::Format { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
