use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh validation failed: {0}")]
    MeshValidation(String),

    /// The cell Gram matrix could not be factored; usually a degenerate cell.
    #[error("basis conditioning failure on cell {cell}: {reason}")]
    BasisConditioning { cell: usize, reason: String },

    /// Assembly requires a strictly positive conductivity on every cell.
    #[error("coercivity precondition violated: {0}")]
    CoercivityPrecondition(String),

    #[error("invalid coefficient data: {0}")]
    InvalidCoefficients(String),

    /// Raised by the sparse factorization; `pivot` is the elimination step
    /// (in the permuted ordering) at which no usable pivot was found.
    #[error("singular system: no usable pivot at elimination step {pivot} (column {column})")]
    SingularSystem { pivot: usize, column: usize },

    #[error("case validation failed: {0}")]
    CaseValidation(String),

    #[error("unknown case `{0}`")]
    UnknownCase(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("level {level}: {source}")]
    AtLevel { level: usize, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at_level(self, level: usize) -> Self {
        Error::AtLevel {
            level,
            source: Box::new(self),
        }
    }
}
