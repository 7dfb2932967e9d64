use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("model mismatch: expected {expected}, got {found}")]
    ModelMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("alphabet mismatch: rank {left} vs rank {right}")]
    AlphabetMismatch { left: u32, right: u32 },

    #[error("cannot parse word {input:?}: {reason}")]
    WordParse { input: String, reason: String },

    #[error("invalid isometry: {0}")]
    InvalidIsometry(String),

    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("maps do not share a graph and representation")]
    GraphMismatch,

    #[error("unsupported operation: {0}")]
    Capability(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("relaxation did not converge")]
    Unconverged,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("search budget exceeded after {enumerated} candidates (radius {radius_completed} fully searched)")]
    BudgetExceeded {
        enumerated: u64,
        radius_completed: u32,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
