use thiserror::Error;

use crate::scalar::ScalarKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("expected {expected} entries, got {actual}")]
    EntryCount { expected: usize, actual: usize },
    #[error("row {row} has {actual} entries, expected {expected}")]
    RaggedRows { row: usize, expected: usize, actual: usize },
    #[error("row {0} has zero sum")]
    ZeroRowSum(usize),
    #[error("column {0} has zero sum")]
    ZeroColSum(usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is {rows}x{cols}, expected 3x3")]
    NotThreeByThree { rows: usize, cols: usize },
    #[error("tolerance must be zero for exact (rational) matrices")]
    NonzeroToleranceInExactMode,
    #[error("tolerance must be non-negative")]
    NegativeTolerance,
    #[error("matrix has a non-positive entry at ({row}, {col})")]
    NonPositiveMatrix { row: usize, col: usize },
    #[error("operation requires an exact rational matrix, got {0}")]
    FloatModeUnsupported(ScalarKind),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("family parameter {0} must be positive")]
    NonPositiveParameter(&'static str),
    #[error("n = {n} must exceed max(2k, 2l) = {bound}")]
    DimensionTooSmall { n: usize, bound: usize },
    #[error("x + z = {sum} lies outside (0, 1/{k})")]
    SumOutOfRange { sum: String, k: usize },
    #[error("x + z = {sum} equals 2/n, which makes the matrix doubly stochastic")]
    DegenerateSum { sum: String },

    #[error("no positive row-stochastic {n}x{n} matrix has denominators <= {bound}")]
    BoundTooSmall { n: usize, bound: u64 },
    #[error("search space of at least {size} matrices exceeds the limit of {limit}")]
    SearchTooLarge { size: u128, limit: u128 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: entry `{entry}` does not match matrix kind {kind}")]
    MixedKinds {
        line: usize,
        entry: String,
        kind: ScalarKind,
    },

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    /// True for errors caused by bad input, as opposed to broken internal
    /// invariants.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::InvariantViolation(_))
    }
}
