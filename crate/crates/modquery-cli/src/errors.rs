//! Exit-code taxonomy: 2 usage, 3 I/O, 4 malformed input, 5 failed
//! precondition, 6 non-convergence. Every library error maps onto one of
//! these so scripts can branch on the cause.

use modquery::ensemble::IndexError;
use modquery::eval::EvalError;
use modquery::graph::GraphError;
use modquery::lfr::LfrError;
use modquery::query::QueryError;
use modquery::rwr::RwrError;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_FORMAT: u8 = 4;
pub const EXIT_PRECONDITION: u8 = 5;
pub const EXIT_NONCONVERGENCE: u8 = 6;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> CliError {
        CliError { code: EXIT_USAGE, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> CliError {
        CliError { code: EXIT_IO, message: message.into() }
    }

    pub fn precondition(message: impl Into<String>) -> CliError {
        CliError { code: EXIT_PRECONDITION, message: message.into() }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> CliError {
        let code = match &e {
            GraphError::Io { .. } => EXIT_IO,
            GraphError::MalformedLine { .. }
            | GraphError::DuplicateId(_)
            | GraphError::EndpointOutOfRange { .. }
            | GraphError::BadWeight { .. } => EXIT_FORMAT,
            GraphError::NoEdges => EXIT_PRECONDITION,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<IndexError> for CliError {
    fn from(e: IndexError) -> CliError {
        let code = match &e {
            IndexError::Io { .. } => EXIT_IO,
            IndexError::BadMagic
            | IndexError::VersionMismatch { .. }
            | IndexError::ChecksumMismatch
            | IndexError::Malformed(_) => EXIT_FORMAT,
            IndexError::BadConfig(_) => EXIT_USAGE,
            IndexError::NotConnected
            | IndexError::FingerprintMismatch
            | IndexError::Partition(_) => EXIT_PRECONDITION,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<QueryError> for CliError {
    fn from(e: QueryError) -> CliError {
        let code = match &e {
            QueryError::EmptySeeds => EXIT_USAGE,
            QueryError::SeedOutOfRange(..) => EXIT_PRECONDITION,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<RwrError> for CliError {
    fn from(e: RwrError) -> CliError {
        match e {
            RwrError::BadAlpha(_) => CliError::usage(e.to_string()),
            RwrError::NonConvergence { .. } => {
                CliError { code: EXIT_NONCONVERGENCE, message: e.to_string() }
            }
            RwrError::Query(inner) => inner.into(),
        }
    }
}

impl From<LfrError> for CliError {
    fn from(e: LfrError) -> CliError {
        let code = match &e {
            LfrError::BadConfig(_) => EXIT_USAGE,
            LfrError::Infeasible(_) => EXIT_PRECONDITION,
            LfrError::WiringFailure(_) => EXIT_NONCONVERGENCE,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> CliError {
        match e {
            EvalError::BadConfig(_) => CliError::usage(e.to_string()),
            EvalError::GraphIndexMismatch { .. } | EvalError::NoEligibleTrials => {
                CliError::precondition(e.to_string())
            }
            EvalError::Query(inner) => inner.into(),
            EvalError::Rwr(inner) => inner.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> CliError {
        CliError::io(format!("manifest serialization failed: {e}"))
    }
}
