use thiserror::Error;

/// Errors raised by landscape operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NonHermitianInput { deviation: f64 },
    #[error("direction is not Hermitian (max deviation {deviation:e})")]
    NonHermitianDirection { deviation: f64 },
    #[error("matrix is not unitary (||U^dag U - I||_F = {deviation:e})")]
    NonUnitary { deviation: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix violates the required {0} symmetry")]
    SymmetryViolation(&'static str),
    #[error("invalid state or weight in term {term}: {reason}")]
    InvalidState { term: usize, reason: String },
    #[error("operator of term {term} is proportional to the identity")]
    ConstantOperator { term: usize },
    #[error("operators do not form a POVM")]
    NotPovm,
    #[error("{0} do not pairwise commute")]
    NotCommuting(&'static str),
    #[error("exhaustive enumeration over {dimension}! permutations exceeds the limit of {limit}!")]
    TooLarge { dimension: usize, limit: usize },
    #[error("state block sizes {state:?} differ from operator block sizes {operator:?}")]
    BlockMismatch {
        state: Vec<usize>,
        operator: Vec<usize>,
    },
    #[error("operators are not an optimal projective measurement in the block frame")]
    NotProjective,
    #[error("point is not a local maximum")]
    NotLocalMax,
    #[error("operation requires M = {expected} terms, found {found}")]
    WrongM { expected: usize, found: usize },
    #[error("{0} are not perfectly distinguishable")]
    NotDistinguishable(&'static str),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("parse error in field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonHermitianInput { .. } => "NonHermitianInput",
            Error::NonHermitianDirection { .. } => "NonHermitianDirection",
            Error::NonUnitary { .. } => "NonUnitary",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::SymmetryViolation(_) => "SymmetryViolation",
            Error::InvalidState { .. } => "InvalidState",
            Error::ConstantOperator { .. } => "ConstantOperator",
            Error::NotPovm => "NotPOVM",
            Error::NotCommuting(_) => "NotCommuting",
            Error::TooLarge { .. } => "TooLarge",
            Error::BlockMismatch { .. } => "BlockMismatch",
            Error::NotProjective => "NotProjective",
            Error::NotLocalMax => "NotLocalMax",
            Error::WrongM { .. } => "WrongM",
            Error::NotDistinguishable(_) => "NotDistinguishable",
            Error::OutOfRange(_) => "OutOfRange",
            Error::InvalidPermutation(_) => "InvalidPermutation",
            Error::Parse { .. } | Error::Field { .. } => "ParseError",
            Error::Io(_) => "IoError",
            Error::Csv(_) => "IoError",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
