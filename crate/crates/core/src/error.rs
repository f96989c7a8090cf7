use crate::map::Side;
use crate::space::{Point, Space};

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the crate.
///
/// Failed *checks* (a contraction inequality that does not hold, a map that
/// is not cyclic on its sampled regions) are not errors; they come back as
/// verdict values. Errors are reserved for inputs that make the requested
/// computation meaningless.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("points live in different spaces ({left} vs {right})")]
    SpaceMismatch { left: Space, right: Space },
    #[error("space needs dim >= 1 and finite p >= 2, got dim {dim}, p {p}")]
    BadSpace { dim: usize, p: f64 },
    #[error("point has {got} coordinates, space wants {want}")]
    CoordCount { got: usize, want: usize },
    #[error("interpolation parameter {0} is outside [0, 1]")]
    LambdaOutOfRange(f64),
    #[error("convexity check needs finite 0 <= m <= 2M with M > 0, got m = {m}, M = {big}")]
    ConvexityPrecondition { m: f64, big: f64 },
    #[error("convexity check hypothesis fails: d({which}, anchor) = {got} exceeds M = {big}")]
    ConvexityHypothesis {
        which: &'static str,
        got: f64,
        big: f64,
    },
    #[error("region is empty")]
    EmptyRegion,
    #[error("degenerate region bounds: lower must not exceed upper in any coordinate")]
    BadBounds,
    #[error("sampling density {0} is too small; need at least 2")]
    DensityTooSmall(usize),
    #[error("point {point} lies outside the {side} region")]
    NotInRegion { point: Point, side: Side },
    #[error("point {0} lies in neither region")]
    OutsideDomain(Point),
    #[error("point {0} lies in both regions; its side is ambiguous")]
    AmbiguousSide(Point),
    #[error("no table entry for point {0}")]
    TableMiss(Point),
    #[error("orbit leaves the expected side at step {index}")]
    CyclicityViolation { index: usize },
    #[error("rule shape does not match the space: matrix must be dim x dim, offset length dim")]
    BadRuleShape,
    #[error("depth {got} is too small; need at least {min}")]
    DepthTooSmall { got: usize, min: usize },
    #[error("contraction rate {0} must lie strictly between 0 and 1")]
    EtaOutOfRange(f64),
    #[error("{name} must be positive, got {value}")]
    NonPositiveTolerance { name: &'static str, value: f64 },
    #[error("max_iter {0} is too small; need at least 4")]
    MaxIterTooSmall(usize),
    #[error("report carries no trace; rerun the solve with record_trace set")]
    MissingTrace,
    #[error("need at least {need} seeds, got {got}")]
    TooFewSeeds { got: usize, need: usize },
    #[error("decay {0} must lie strictly between 0 and 1")]
    DecayOutOfRange(f64),
    #[error("sequence length {got} is too short; need at least {min}")]
    SequenceTooShort { got: usize, min: usize },
    #[error("sequences must share one length, got {0}, {1}, {2}")]
    LengthMismatch(usize, usize, usize),
    #[error("{0}")]
    InvalidInput(String),
}
