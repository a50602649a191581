use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),

    #[error("vertex {vertex} out of range for a polygon with {vertices} vertices")]
    VertexOutOfRange { vertex: usize, vertices: usize },

    #[error("vertices {0} and {1} are not joined by an edge")]
    InvalidEdge(usize, usize),

    #[error("expected {expected} traversal events (one per particle), got {got}")]
    EventArity { expected: usize, got: usize },

    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("provider `{provider}` returned weight {weight:e} below its declared floor {floor:e}")]
    ContractViolation {
        provider: String,
        weight: f64,
        floor: f64,
    },

    #[error("nonpositive entry {value} at index {index}")]
    NonPositive { index: usize, value: f64 },

    #[error("operation not supported for provider `{0}`")]
    UnsupportedProvider(String),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("reciprocal series diverges: {0}")]
    Divergent(String),

    #[error("singular linear system")]
    Singular,

    #[error("kernel value {value} exceeds certified bound {bound} at step {step}")]
    KernelBound { value: f64, bound: f64, step: u64 },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
