use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the hedging engine can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("time grid is not strictly increasing at index {index}")]
    NonMonotoneGrid { index: usize },

    #[error("time grid needs at least 3 samples (M >= 2), got {points}")]
    GridTooShort { points: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("quadratic variation grid does not match the path grid")]
    QvGridMismatch,

    #[error("invalid quadratic variation: {0}")]
    InvalidQuadraticVariation(String),

    #[error("refinement must be >= 1, got {0}")]
    InvalidRefinement(usize),

    #[error("signature kernel left the representable range (|k| > 1e300 or non-finite)")]
    NonFiniteKernel,

    #[error("truncation depth {depth} exceeds the cap {cap}")]
    DepthTooLarge { depth: usize, cap: usize },

    #[error("truncated signatures differ in depth or dimension ({left} vs {right})")]
    DepthMismatch { left: usize, right: usize },

    #[error("words of total length {len} exceed the truncation depth {depth}")]
    WordTooLong { len: usize, depth: usize },

    #[error("letter {letter} is outside the alphabet of size {dim}")]
    BadLetter { letter: usize, dim: usize },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("regularisation lambda must be positive and finite, got {0}")]
    InvalidLambda(f64),

    #[error("payoff {index} is not finite")]
    NonFinitePayoff { index: usize },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("linear solve failed: {0}")]
    SolveFailed(String),

    #[error("invalid market spec: {0}")]
    InvalidSpec(String),

    #[error("payoff coordinate {coordinate} out of range for a {dim}-dimensional path")]
    BadCoordinate { coordinate: usize, dim: usize },

    #[error("spot must be positive, got {0}")]
    NonPositiveSpot(f64),

    #[error("no closed-form delta hedge for payoff {0}")]
    UnsupportedPayoff(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
