use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of a closed-form function.
    #[error("{function}: argument {value} outside {domain}")]
    Domain {
        function: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("item {index}: size {size} is not in (0, 1]")]
    ItemSize { index: usize, size: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Calling `offer` after the algorithm has stopped, and similar misuse.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("assignment overfills bin {bin} (load {load})")]
    InfeasibleAssignment { bin: usize, load: f64 },

    #[error("malformed transcript at record {index}: {reason}")]
    Transcript { index: usize, reason: String },
}

pub(crate) fn domain(function: &'static str, value: f64, domain: &'static str) -> Error {
    Error::Domain {
        function,
        value,
        domain,
    }
}
