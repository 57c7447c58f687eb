use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("space must contain at least one point")]
    EmptySpace,
    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite distance at ({0}, {1})")]
    NonFiniteDistance(usize, usize),
    #[error("negative distance at ({0}, {1})")]
    NegativeDistance(usize, usize),
    #[error("asymmetric distance at ({0}, {1})")]
    AsymmetricDistance(usize, usize),
    #[error("zero off-diagonal distance at ({0}, {1})")]
    ZeroDistance(usize, usize),
    #[error("nonzero diagonal distance at index {0}")]
    NonzeroDiagonal(usize),
    #[error("nonpositive mass at index {0}")]
    NonpositiveMass(usize),
    #[error("invalid {what} value at index {index}")]
    InvalidEntry { what: &'static str, index: usize },
    #[error("{what} must have at least one strictly positive entry")]
    IdenticallyZero { what: &'static str },
    #[error("{what} requires strictly positive weight (zero at index {index})")]
    ZeroWeight { what: &'static str, index: usize },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("level below base average: lambda = {level}, average = {average}")]
    LevelBelowBaseAverage { level: f64, average: f64 },
    #[error("level below global average: lambda = {level}, average over the space = {average}")]
    LevelBelowGlobalAverage { level: f64, average: f64 },
    #[error("level base a = {a} is below the required bound 2(4 theta eta)^D = {required}")]
    LevelBaseTooSmall { a: f64, required: f64 },
    #[error("level iteration exceeded {0} levels")]
    LevelCapExceeded(usize),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
