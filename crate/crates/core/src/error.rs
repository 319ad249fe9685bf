use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grids do not match: {0}")]
    GridMismatch(String),
    #[error("annulus [{inner}, {outer}] is not inside [0, {nyquist}]")]
    AnnulusOutOfRange { inner: f64, outer: f64, nyquist: f64 },
    #[error("sumset may wrap around the lattice: {0}")]
    AliasingRisk(String),
    #[error("modulation radii must satisfy R > r > 0 (got r={r}, R={big_r})")]
    BadRadii { r: f64, big_r: f64 },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("level {level} outside admissible range {range}")]
    LevelOutOfRange { level: i64, range: String },
    #[error("derivative depth {depth} exceeds supported depth 4")]
    DepthUnsupported { depth: usize },
    #[error("dyadic shell [{lo}, {hi}] contains no lattice point")]
    EmptyShell { lo: f64, hi: f64 },
    #[error("symbol is not an x-independent multiplier")]
    NotAMultiplier,
    #[error("dense matrix of dimension {dim} exceeds cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("support violation: {0}")]
    SupportViolation(String),
    #[error("bad exponent: {0}")]
    BadExponent(String),
    #[error("no dyadic shell is resolvable on the sampling lattice")]
    NotResolvable,
    #[error("invalid norm parameters: {0}")]
    InvalidNormSpec(String),
    #[error("invalid corona specification: {0}")]
    InvalidCorona(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
