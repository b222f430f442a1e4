use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime or lies outside [2, 2^61)")]
    NotPrime(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("linear system has no solution")]
    Inconsistent,
    #[error("matrix has {rows} rows but only {cols} columns")]
    RowsExceedCols { rows: usize, cols: usize },
    #[error("work limit exceeded: {needed} units requested, limit is {limit}")]
    WorkLimitExceeded { needed: u128, limit: u128 },
    #[error("invalid GRS specification: {0}")]
    SpecInvalid(String),
    #[error("coefficient matrix is not a generalized Reed-Solomon generator")]
    NotGrs,
    #[error("coefficient matrix is not MDS")]
    NotMds,
    #[error("field GF({p}) is too small for {needed} distinct evaluation points")]
    FieldTooSmall { p: u64, needed: usize },
    #[error("no MDS extension found after {attempts} attempts")]
    ExtensionFailed { attempts: usize },
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
    #[error("invalid parameters: {0}")]
    ParamInvalid(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("construction invariant violated: {0}")]
    AlgebraViolation(String),
    #[error("peer reported error {code}: {message}")]
    Remote { code: u16, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "NotPrime",
            Error::ZeroInverse => "ZeroInverse",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::Inconsistent => "Inconsistent",
            Error::RowsExceedCols { .. } => "RowsExceedCols",
            Error::WorkLimitExceeded { .. } => "WorkLimitExceeded",
            Error::SpecInvalid(_) => "SpecInvalid",
            Error::NotGrs => "NotGrs",
            Error::NotMds => "NotMds",
            Error::FieldTooSmall { .. } => "FieldTooSmall",
            Error::ExtensionFailed { .. } => "ExtensionFailed",
            Error::ParamMismatch(_) => "ParamMismatch",
            Error::ParamInvalid(_) => "ParamInvalid",
            Error::Malformed(_) => "Malformed",
            Error::AlgebraViolation(_) => "AlgebraViolation",
            Error::Remote { .. } => "Remote",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}

pub(crate) fn mismatch(msg: impl Into<String>) -> Error {
    Error::DimensionMismatch(msg.into())
}
