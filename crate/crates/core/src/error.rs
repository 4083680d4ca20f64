use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph has no vertices and no edges")]
    EmptyGraph,
    #[error("unknown edge index {0}")]
    UnknownEdge(usize),
    #[error("unknown vertex label {0}")]
    UnknownVertex(i64),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("edge subset is not a spanning tree: {0}")]
    InvalidTree(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("polynomial division is not exact")]
    InexactDivision,
    #[error("cannot parse polynomial: {0}")]
    PolyParse(String),
    #[error("cannot parse rational number: {0}")]
    RationalParse(String),

    #[error("configuration basis does not have full row rank")]
    RankDeficient,
    #[error("operation requires a configuration coming from a graph")]
    NotAGraph,
    #[error("momentum assignment is not of degree zero (component {component})")]
    NotDegreeZero { component: usize },
    #[error("invalid signature entry {0}; expected +1 or -1")]
    InvalidSignature(i8),
    #[error("quadratic spaces differ")]
    SpaceMismatch,
    #[error("scalar method requires a one-dimensional Euclidean space")]
    NotScalar,

    #[error("projective point must have a nonzero coordinate")]
    ZeroPoint,

    #[error("edge weight {edge} is not positive")]
    NonPositiveWeight { edge: usize },
    #[error("operation requires Euclidean signature")]
    NotEuclidean,
    #[error("operation requires Minkowski signature (+,-,...,-) with dimension >= 2")]
    NotMinkowski,
    #[error("operation requires vanishing masses")]
    MassiveKinematics,
    #[error("mass of edge {edge} is invalid: {reason}")]
    InvalidMass { edge: usize, reason: String },
    #[error("propagator of edge {edge} is on shell (pole)")]
    Pole { edge: usize },
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
    #[error("sample count must be positive")]
    NoSamples,

    #[error("imaginary part of the period matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("imaginary part of the period matrix is not positive definite; increase Im(z) on edge {edge}")]
    OrbitNotPositiveDefinite { edge: usize },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("no sign change of the threshold function on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("solver failed: {0}")]
    SolverFailed(String),

    #[error("invalid graph file: {0}")]
    GraphFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
