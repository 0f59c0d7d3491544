use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("element id {id} out of range for size {size}")]
    IdOutOfRange { id: u64, size: usize },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown relation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("formula is not a sentence (free variables: {0})")]
    NotASentence(String),
    #[error("number component {value} exceeds {bound}")]
    ComponentOutOfRange { value: u64, bound: u64 },
    #[error("size limit exceeded: {0}")]
    SizeExceeded(String),
    #[error("resource must be positive, got {0}")]
    NonPositiveResource(i64),
    #[error("graph is not rooted")]
    NotRooted,
    #[error("graph is not acyclic")]
    NotAcyclic,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("vertex {0} is a leaf")]
    IsLeaf(u32),
    #[error("internal lemma violation: {0}")]
    InternalLemmaViolation(String),
    #[error("value out of range: {0}")]
    RangeViolation(String),
    #[error("nested lrec operators cannot be compiled")]
    NestedLrec,
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("graph is not an interval graph")]
    NotInterval,
    #[error("not a maximal clique")]
    NotAMaxclique,
    #[error("invalid cardinality condition: {0}")]
    InvalidCondition(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MalformedInput(_) => "MalformedInput",
            Error::ArityMismatch(_) => "ArityMismatch",
            Error::IdOutOfRange { .. } => "IdOutOfRange",
            Error::UnboundVariable(_) => "UnboundVariable",
            Error::UnknownSymbol(_) => "UnknownSymbol",
            Error::NotASentence(_) => "NotASentence",
            Error::ComponentOutOfRange { .. } => "ComponentOutOfRange",
            Error::SizeExceeded(_) => "SizeExceeded",
            Error::NonPositiveResource(_) => "NonPositiveResource",
            Error::NotRooted => "NotRooted",
            Error::NotAcyclic => "NotAcyclic",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::IsLeaf(_) => "IsLeaf",
            Error::InternalLemmaViolation(_) => "InternalLemmaViolation",
            Error::RangeViolation(_) => "RangeViolation",
            Error::NestedLrec => "NestedLrec",
            Error::UnsupportedDimension(_) => "UnsupportedDimension",
            Error::SizeMismatch(..) => "SizeMismatch",
            Error::NotInterval => "NotInterval",
            Error::NotAMaxclique => "NotAMaxclique",
            Error::InvalidCondition(_) => "InvalidCondition",
            Error::Overflow(_) => "Overflow",
        }
    }
}
