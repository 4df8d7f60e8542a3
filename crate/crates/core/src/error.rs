use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Variants are split into two families: validation failures (bad input,
/// out-of-range parameters, malformed configurations) and numerical failures
/// (singular maps, inconsistent systems, estimators whose confidence
/// machinery breaks down). [`Error::is_numerical`] tells them apart.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for {n}-qubit Pauli basis (size {size})")]
    IndexOutOfRange { index: usize, n: usize, size: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{n} qubits exceeds the supported maximum of {max} for this operation")]
    TooManyQubits { n: usize, max: usize },

    #[error("{what} = {value} is outside the valid range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: String,
    },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("map is not trace preserving (first-row deviation {deviation:e})")]
    NotTracePreserving { deviation: f64 },

    #[error("identity Pauli has no transporting Clifford")]
    IdentityPauli,

    #[error("matrix is not a Clifford map: {0}")]
    NotClifford(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unital block is singular: smallest singular value {singular_value:e} below threshold {threshold:e}")]
    Singular { singular_value: f64, threshold: f64 },

    #[error("Clifford set spans rank {rank}, need {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("estimator diverges: {0}")]
    Divergent(String),

    #[error("sample budget exceeded: {needed} samples needed, limit {limit}")]
    BudgetExceeded { needed: u64, limit: u64 },

    #[error("circuit has {t} T gates, more than the limit of {t_max}")]
    TooManyTGates { t: usize, t_max: usize },

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics (singularity, divergence,
    /// inconsistency) rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. }
                | Error::RankDeficient { .. }
                | Error::Divergent(_)
                | Error::BudgetExceeded { .. }
                | Error::Inconsistent(_)
        )
    }

    /// True for failures reading or writing files.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Csv(_))
    }

    pub(crate) fn out_of_range(what: &'static str, value: f64, range: impl Into<String>) -> Self {
        Error::OutOfRange {
            what,
            value,
            range: range.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
