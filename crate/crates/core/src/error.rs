use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("embedding dimension mismatch: item {item} has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        item: usize,
        expected: usize,
        found: usize,
    },
    #[error("counterclockwise tie-break requires a 2-D catalog, got dimension {0}")]
    NotTwoDimensional(usize),
    #[error("empty catalog")]
    EmptyCatalog,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("acceptance probability {value} for pair ({server}, {requester}) is outside [0, 1]")]
    AcceptanceOutOfRange {
        server: usize,
        requester: usize,
        value: f64,
    },
    #[error("capacity {capacity} must satisfy 0 < C < N = {items}")]
    CapacityOutOfRange { capacity: f64, items: usize },
    #[error(
        "capacity equation has no root: {positive} items have a positive insertion rate, need more than {capacity}"
    )]
    NoCharacteristicTime { positive: usize, capacity: f64 },
    #[error("characteristic time solve failed at iteration {iteration}: {source}")]
    SolverIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("capacity-derivative sum is zero, Jacobian of G is singular")]
    SingularJacobian,
    #[error("spectral norm estimate did not converge after {iterations} iterations (last estimate {estimate})")]
    PowerIteration { iterations: usize, estimate: f64 },
    #[error("instance exceeds the enumeration budget: {0}")]
    BudgetExceeded(String),
    #[error("unknown item id {id} (catalog has {items} items)")]
    UnknownItem { id: usize, items: usize },
    #[error("trace has no timestamps")]
    MissingTimestamps,
    #[error("timestamps must be nondecreasing (position {0})")]
    NonMonotoneTimestamps(usize),
    #[error("empty trace")]
    EmptyTrace,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
