use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("node index {index} out of range for graph with {p} nodes")]
    NodeOutOfRange { index: usize, p: usize },

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("edge set contains a directed cycle")]
    Cycle,

    #[error("duplicate node label `{0}`")]
    DuplicateLabel(String),

    #[error("node sets passed to d-separation overlap")]
    OverlappingSets,

    #[error("path enumeration exceeded the cap of {cap} paths")]
    PathCapExceeded { cap: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("unknown context `{0}`")]
    UnknownContext(String),

    #[error("context `{id}`: {reason}")]
    InvalidContext { id: String, reason: String },

    #[error("no observational context in dataset")]
    MissingObservational,

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("design matrix is rank deficient (rank {rank} < {cols} columns)")]
    SingularDesign { rank: usize, cols: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("{candidates} candidate predictors exceed the cap max_p = {cap}; raise it with --max-p")]
    TooManyCandidates { candidates: usize, cap: usize },

    #[error("edge {0} -> {1} is not in the graph")]
    EdgeAbsent(usize, usize),

    #[error("model is not standardized: node {node} has variance {variance}")]
    NotStandardized { node: usize, variance: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularDesign { .. }
                | Error::Numerical(_)
                | Error::UndefinedCorrelation(_)
                | Error::PathCapExceeded { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}
