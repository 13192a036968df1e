use thiserror::Error;

pub type Result<T, E = IceError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IceError {
    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: String, reason: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("missing input descriptor `{0}`")]
    MissingDescriptor(&'static str),

    #[error("platform `{0}` has no core count; this model needs one")]
    NeedsCoreCount(String),

    #[error("invalid cache geometry: {0}")]
    InvalidCacheGeometry(String),

    #[error("undefined ratio: work is zero")]
    UndefinedRatio,

    #[error("division by zero energy in comparison")]
    DivisionByZero,

    #[error("complexity triple violates work >= span >= 1: work={work}, span={span}")]
    InvalidTriple { work: u64, span: u64 },

    #[error("algorithm `{algorithm}` does not accept {kind} input")]
    InputKindMismatch {
        algorithm: &'static str,
        kind: &'static str,
    },

    #[error("insufficient data: {got} samples, need at least {need}")]
    InsufficientData { got: usize, need: usize },

    #[error("degenerate fit: design matrix is rank deficient (rank {rank} of 3)")]
    DegenerateFit { rank: usize },

    #[error("trace too large: {accesses} accesses exceeds cap {cap}")]
    TraceTooLarge { accesses: u64, cap: usize },

    #[error("trace has {core_count} cores; serialize it explicitly for an ideal-cache run")]
    MultiCoreTrace { core_count: usize },

    #[error("unknown {kind} `{name}`; known: {}", candidates.join(", "))]
    UnknownName {
        kind: &'static str,
        name: String,
        candidates: Vec<String>,
    },

    #[error("ambiguous {kind} `{name}` matches: {}", matches.join(", "))]
    AmbiguousName {
        kind: &'static str,
        name: String,
        matches: Vec<String>,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl IceError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        IceError::InvalidArgument {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub(crate) fn require_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(IceError::invalid(
            field,
            format!("must be positive, got {value}"),
        ))
    }
}
