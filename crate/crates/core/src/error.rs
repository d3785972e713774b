use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("{rule} at line {line}")]
    InvalidBar { line: u64, rule: String },

    #[error("duplicate date {0}")]
    DuplicateDate(chrono::NaiveDate),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("turnover probability must be < 1 (got {0})")]
    TurnoverSaturated(f64),

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    #[error("series too short for one rotation: total volume {total} < free float {free_float}")]
    SeriesTooShort { total: f64, free_float: f64 },

    #[error("grid disjoint from data")]
    GridDisjoint,

    #[error("grid mismatch between {0}")]
    GridMismatch(&'static str),

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("no channel: need at least 2 barriers, found {0}")]
    NoChannel(usize),

    #[error("no open channel at energy {energy} (asymptotic levels {left}, {right})")]
    NoOpenChannel { energy: f64, left: f64, right: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable identifier, emitted by the CLI in JSON mode.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse_error",
            Error::InvalidBar { .. } => "invalid_bar",
            Error::DuplicateDate(_) => "duplicate_date",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::TurnoverSaturated(_) => "turnover_saturated",
            Error::DegenerateRegression(_) => "degenerate_regression",
            Error::SeriesTooShort { .. } => "series_too_short",
            Error::GridDisjoint => "grid_disjoint",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::NoConvergence(_) => "no_convergence",
            Error::NoChannel(_) => "no_channel",
            Error::NoOpenChannel { .. } => "no_open_channel",
            Error::Io { .. } => "io_error",
            Error::Json(_) => "json_error",
        }
    }
}
