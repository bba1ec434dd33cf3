use thiserror::Error;

/// Errors raised by geometric constructions, evaluations and the solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("too many generators ({count}, limit {limit})")]
    TooManyGenerators { count: usize, limit: usize },

    #[error("vector {index} has zero length or is not finite")]
    DegenerateVector { index: usize },

    #[error("generators are rank deficient (rank {rank} < {dim})")]
    RankDeficient { rank: usize, dim: usize },

    #[error("cone is not pointed")]
    NotPointed,

    #[error("facet representation inconsistent with generators: {0}")]
    InconsistentFacets(String),

    #[error("operation requires n = 3, got n = {0}")]
    UnsupportedDimension(usize),

    #[error("sampling acceptance rate {rate:.3e} is below 1e-4; the cap is too thin")]
    ThinCone { rate: f64 },

    #[error("direction {index} is not a unit vector (norm {norm})")]
    NonUnitDirection { index: usize, norm: f64 },

    #[error("direction {index} is not strictly inside the cone")]
    DirectionOutsideCone { index: usize },

    #[error("directions {first} and {second} coincide")]
    DuplicateDirection { first: usize, second: usize },

    #[error("value {index} must be positive and finite, got {value}")]
    NonPositiveValue { index: usize, value: f64 },

    #[error("normal vector lies outside the closed dual cap")]
    OutsideDualCap,

    #[error("direction lies outside the open cap of the cone")]
    OutsideCap,

    #[error("pseudo-cone must be snapped to its radial function first")]
    NotSnapped,

    #[error("index {index} out of range for {len} directions")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("quadrature did not converge: error estimate {estimate:.3e} above tolerance {tolerance:.3e}")]
    QuadratureNotConverged { estimate: f64, tolerance: f64 },

    #[error("gauge threshold delta must be positive and finite, got {0}")]
    InvalidDelta(f64),

    #[error("value {value} is not above the gauge threshold {delta}")]
    BelowGaugeThreshold { value: f64, delta: f64 },

    #[error("gauge saturates at {sup} and cannot reach {target}")]
    GaugeSaturated { sup: f64, target: f64 },

    #[error("Orlicz function '{name}' is not positive at t = {t}")]
    NonPositiveOrlicz { name: String, t: f64 },

    #[error("unknown Orlicz function '{0}'")]
    UnknownOrlicz(String),

    #[error("normal is only {distance:.3e} away from a cell boundary")]
    NearCellBoundary { distance: f64 },

    #[error("beta {beta} outside the admissible range (0, {max})")]
    InvalidBeta { beta: f64, max: f64 },

    #[error("entropy projection would move radial {index} to {value}, not above delta = {delta}")]
    ProjectionBelowDelta { index: usize, value: f64, delta: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
