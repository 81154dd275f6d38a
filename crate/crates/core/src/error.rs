use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CtmError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CtmError {
    #[error("invalid machine space (n={n_states}, m={n_symbols}): need n >= 1 and 2 <= m <= 9")]
    InvalidSpace { n_states: u32, n_symbols: u32 },

    #[error("the reduced space needs at least two states (got n={0})")]
    NotReducible(u32),

    #[error("machine index {index} out of range for a space of {count} machines")]
    IndexOutOfRange { index: String, count: String },

    #[error("transition table does not belong to the reduced space: {0}")]
    NotInReducedSpace(String),

    #[error("full enumeration of {count} machines exceeds the budget of {budget}")]
    BudgetExceeded { count: String, budget: u64 },

    #[error("no machine halted within {probe_cutoff} steps among {probed} probed machines")]
    NoHalters { probed: u64, probe_cutoff: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no complexity table loaded for alphabet {0}")]
    TableNotLoaded(u32),

    #[error("unsupported alphabet size {0} (expected one of 2, 4, 5, 6, 9)")]
    UnsupportedAlphabet(u32),

    #[error("string length {len} outside the supported range [{min}, {max}]")]
    LengthOutOfRange { len: usize, min: usize, max: usize },

    #[error("span {span} invalid for a string of length {len} (span must lie in [2, 12])")]
    SpanOutOfRange { span: usize, len: usize },

    #[error("no complexity value available for {0:?}")]
    MissingValue(String),

    #[error("string {0:?} is not binary")]
    NonBinary(String),

    #[error("perfect separation: the logistic model has no finite maximum-likelihood fit")]
    PerfectSeparation,

    #[error("{0}")]
    Degenerate(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CtmError {
    pub(crate) fn parse(path: &str, line: usize, msg: impl Into<String>) -> Self {
        CtmError::Parse {
            path: path.to_string(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CtmError::Io {
            path: path.into(),
            source,
        }
    }
}
