use thiserror::Error;

use crate::network::{BranchId, BusId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {section} row {row}, column {column}: {message}")]
    Parse {
        section: String,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("case format error: {0}")]
    Format(String),

    #[error("invalid case: {0}")]
    Validation(String),

    #[error("bus {0} is not defined in the case")]
    UnknownBus(BusId),

    #[error("branch {0} is not defined in the case")]
    UnknownBranch(BranchId),

    #[error("network is split into {components} islands")]
    Disconnected { components: usize },

    #[error("no in-service slack bus")]
    NoSlack,

    #[error("removing branch {0} islands the network")]
    Islanding(BranchId),

    #[error("base case did not converge: {0}")]
    BaseCaseDiverged(String),

    #[error("singular matrix at pivot {0}")]
    Singular(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("report encoding: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Format(_)
            | Error::Validation(_)
            | Error::UnknownBus(_)
            | Error::UnknownBranch(_)
            | Error::Disconnected { .. }
            | Error::NoSlack
            | Error::Config(_)
            | Error::Io { .. } => 1,
            Error::BaseCaseDiverged(_) => 2,
            Error::Islanding(_) | Error::Singular(_) | Error::Json(_) => 3,
        }
    }
}
