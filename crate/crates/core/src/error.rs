use thiserror::Error;

/// Errors raised by constructors and operations. Locations are rendered as
/// `edge:offset` strings so the error type stays independent of the scalar.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CuError {
    #[error("edge {edge} refers to unknown vertex {vertex}")]
    DanglingEdge { edge: String, vertex: String },
    #[error("edge {edge} has nonpositive length")]
    NonPositiveLength { edge: String },
    #[error("duplicate name {0}")]
    DuplicateName(String),
    #[error("unknown edge {0}")]
    UnknownEdge(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("position {pos} is outside edge {edge}")]
    BadPosition { edge: String, pos: String },
    #[error("invalid patch: {0}")]
    InvalidPatch(String),
    #[error("not lower semicontinuous at {at}: point value {value} exceeds the limit {limit}")]
    NotLsc { at: String, value: String, limit: String },
    #[error("pieces leave a gap at {at}")]
    CoverGap { at: String },
    #[error("pieces overlap at {at}")]
    PieceOverlap { at: String },
    #[error("no value given for isolated point {at}")]
    MissingPointValue { at: String },
    #[error("operands live on different complexes")]
    ComplexMismatch,
    #[error("operands live on different domains")]
    DomainMismatch,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("restrictions disagree on the overlap at {at}")]
    OverlapMismatch { at: String },
    #[error("enumeration produced more than {cap} elements")]
    EnumerationOverflow { cap: usize },
    #[error("exceptional points coincide at {at}")]
    CoincidentExceptional { at: String },
    #[error("exceptional point at {at} has a zero or missing weight")]
    BadWeights { at: String },
    #[error("exceptional point {at} must lie in the interior of an edge")]
    ExceptionalOnVertex { at: String },
    #[error("tuple at {at} has arity {found}, expected {expected}")]
    TupleArity { at: String, expected: usize, found: usize },
    #[error("cover multiplicity {count} exceeds two at {at}")]
    Multiplicity { at: String, count: usize },
    #[error("set {set} is not open: {at} lies on its boundary")]
    NotOpen { set: String, at: String },
    #[error("compatibility fails at {at}: {detail}")]
    Compatibility { at: String, detail: String },
    #[error("section is not continuous at {at}: {detail}")]
    Discontinuous { at: String, detail: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("germs are based at different points")]
    DifferentBasePoints,
    #[error("stalks are not densely generated by compacts at {at}")]
    NotDense { at: String },
    #[error("compact-level map is not sheaf compatible: {0}")]
    NotCompatible(String),
    #[error("could not enlarge the patch: {0}")]
    NoEnlargement(String),
    #[error("{0}")]
    Parse(String),
}

pub type Result<T, E = CuError> = std::result::Result<T, E>;
