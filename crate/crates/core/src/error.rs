use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Everything that can go wrong while building or evaluating a model.
///
/// Variants split into configuration errors (a model or cap is invalid) and
/// domain errors (an argument falls outside the model's domain); see
/// [`Error::is_config`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("discount factor must lie in (0, 1), got {0}")]
    BetaRange(f64),

    #[error("shock space needs at least two states, got {0}")]
    TooFewStates(usize),

    #[error("duplicate state label `{0}`")]
    DuplicateLabel(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid capacity: {0}")]
    InvalidCapacity(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("malformed tree: {0}")]
    MalformedTree(String),

    #[error("{what} has size {size}, above the cap of {cap}")]
    CapExceeded { what: &'static str, size: u128, cap: u128 },

    #[error("expected {expected} entries, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("{what} = {value} lies outside [{lo}, {hi}]")]
    OutOfRange { what: &'static str, value: f64, lo: f64, hi: f64 },

    #[error("cannot shift a depth-0 tree")]
    ShiftDepthZero,

    #[error("partition block {0} has zero probability")]
    ZeroProbabilityBlock(usize),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}

impl Error {
    /// Configuration errors describe a bad model or cap, domain errors a bad
    /// argument to an otherwise valid model.
    pub fn is_config(&self) -> bool {
        !matches!(
            self,
            Error::ArityMismatch { .. }
                | Error::OutOfRange { .. }
                | Error::ShiftDepthZero
                | Error::ZeroProbabilityBlock(_)
        )
    }

    /// Stable machine-readable code, used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::BetaRange(_) => "BETA_RANGE",
            Error::TooFewStates(_) | Error::DuplicateLabel(_) => "INVALID_STATES",
            Error::InvalidPrior(_) => "INVALID_PRIOR",
            Error::InvalidCapacity(_) => "INVALID_CAPACITY",
            Error::InvalidParameter { .. } => "INVALID_PARAMETER",
            Error::MalformedTree(_) => "MALFORMED_TREE",
            Error::CapExceeded { .. } => "CAP_EXCEEDED",
            Error::ArityMismatch { .. } => "ARITY_MISMATCH",
            Error::OutOfRange { .. } => "DOMAIN",
            Error::ShiftDepthZero => "DOMAIN",
            Error::ZeroProbabilityBlock(_) => "ZERO_PROBABILITY_BLOCK",
            Error::InvalidPartition(_) => "INVALID_PARTITION",
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
