use thiserror::Error;

/// Errors raised by the network model, the rate formulas and the discrete oracle.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("invalid ordering: {0}")]
    Ordering(String),

    #[error("power constraint violated at {node}: total fraction {total}")]
    PowerConstraint { node: String, total: f64 },

    #[error("invalid allocation: {0}")]
    Allocation(String),

    #[error("covariance matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid variable set: {0}")]
    VariableSet(String),

    #[error("missing variable `{0}` in joint pmf")]
    MissingVariable(String),

    #[error("invalid pmf: {0}")]
    Pmf(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("incompatible preset: {0}")]
    Preset(String),
}

impl Error {
    /// Stable numeric code used by the command line front end.
    pub fn code(&self) -> u8 {
        match self {
            Error::Domain(_) => 10,
            Error::Index(_) => 11,
            Error::Topology(_) => 12,
            Error::Ordering(_) => 13,
            Error::PowerConstraint { .. } => 14,
            Error::Allocation(_) => 15,
            Error::NotPsd { .. } => 16,
            Error::Numerical(_) => 17,
            Error::VariableSet(_) => 18,
            Error::MissingVariable(_) => 19,
            Error::Pmf(_) => 20,
            Error::Config(_) => 21,
            Error::Preset(_) => 22,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
