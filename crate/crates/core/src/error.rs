use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown group `{0}` (expected one of grigorchuk, grigorchuk-tilde, gamma, gamma-bar, gamma-barbar)")]
    UnknownGroup(String),

    #[error("group definition, line {line}: {message}")]
    Definition { line: usize, message: String },

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("malformed word `{word}`: {message}")]
    Word { word: String, message: String },

    #[error("malformed vertex `{vertex}`: {message}")]
    Vertex { vertex: String, message: String },

    #[error("vertex has level {found}, expected {expected}")]
    LevelMismatch { expected: usize, found: usize },

    #[error("no weight given for generator `{0}`")]
    MissingWeight(String),

    #[error("dimension {dim} exceeds the dense bound {max}")]
    DimensionOverflow { dim: usize, max: usize },

    #[error("operator is not symmetric (entry ({row}, {col}))")]
    NotSymmetric { row: usize, col: usize },

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("empty set")]
    EmptySet,

    #[error("Julia set of z^2 - {0} is not real; lambda must be >= 2")]
    ComplexJulia(f64),

    #[error("growth window [{lo}, {hi}] is invalid: {message}")]
    GrowthWindow { lo: usize, hi: usize, message: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("label `{label}` is not deterministic at vertex `{vertex}`")]
    NonDeterministic { vertex: String, label: String },

    #[error("embeddings overlap at vertex `{0}`")]
    OverlappingEmbeddings(String),

    #[error("substitution system: {0}")]
    Substitution(String),

    #[error("graph file, line {line}: {message}")]
    GraphFormat { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
