use thiserror::Error;

/// Errors raised anywhere in the interpolation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0} (only 2 and 3 are supported)")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid point set: {0}")]
    InvalidPoints(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("no point survived the reduction to the domain")]
    EmptyReduction,

    #[error("point {index} lies outside the bounding box")]
    PointOutsideBox { index: usize },

    #[error("kernel support {support} exceeds the block width {width}")]
    SupportExceedsNeighborhood { support: f64, width: f64 },

    #[error("evaluation point {index} is not covered by any non-empty subdomain")]
    InsufficientCoverage { index: usize },

    #[error("point {index} lies in no active subdomain")]
    NoActiveSubdomain { index: usize },

    #[error("local system of subdomain {subdomain} is singular (cond estimate {cond:e})")]
    SingularLocalSystem { subdomain: usize, cond: f64 },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("degenerate ratio in convergence rate")]
    DegenerateRatio,

    #[error("both endpoints lie in the basin of {0}")]
    SameBasin(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
