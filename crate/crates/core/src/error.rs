use thiserror::Error;

/// Errors surfaced by the core engine.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cannot truncate order-{q} jet to order {p}")]
    BadTruncation { p: usize, q: usize },

    #[error("multiindex order {order} exceeds jet order {p}")]
    OrderTooHigh { order: usize, p: usize },

    #[error("duplicate interpolation nodes at x = {0}")]
    DuplicateNodes(f64),

    #[error("point index {0} out of range for sample of {1} points")]
    PointNotInSample(usize, usize),

    #[error("operation on coincident points is undefined")]
    CoincidentPoints,

    #[error("empty scale schedule")]
    EmptySchedule,

    #[error("need at least {needed} scales, got {got}")]
    TooFewScales { needed: usize, got: usize },

    #[error("need at least {needed} sample points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("fiber dimension decreased at point {point} during saturation; refinement rule is broken")]
    NonMonotoneSaturation { point: usize },

    #[error("Whitney condition check failed; extension refused")]
    CheckFailed,

    #[error("functional lies outside the computed fiber (residual {residual})")]
    OutsideFiber { residual: f64 },

    #[error("no sample point of the source maps into the requested fiber")]
    EmptyFiber,

    #[error("degenerate arc: zero-length parameter interval")]
    DegenerateArc,

    #[error("unknown builtin scene `{0}`")]
    UnknownScene(String),

    #[error("values table does not match the sample: {0}")]
    ValueMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<V> = std::result::Result<V, CoreError>;
