use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge ({u}, {v}): node index out of range for {n} nodes")]
    NodeOutOfRange { u: usize, v: usize, n: usize },
    #[error("edge ({u}, {u}): self-loops are not allowed")]
    SelfLoop { u: usize },
    #[error("edge ({u}, {v}): weight {weight} must be finite and positive")]
    BadWeight { u: usize, v: usize, weight: f64 },
    #[error("probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("signal contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("graph has {n} nodes, above the dense eigendecomposition cap of {cap}")]
    TooLargeForDense { n: usize, cap: usize },
    #[error("symmetric eigensolver did not converge within {iterations} iterations")]
    EigenNoConvergence { iterations: usize },
    #[error("{0} requires a symmetric Laplacian kind")]
    RequiresSymmetricKind(&'static str),
    #[error("node {0} is isolated")]
    IsolatedNode(usize),
    #[error("measures are supported on different connected components")]
    Disconnected,
    #[error("graph is not a subgraph of the comparison graph: {0}")]
    NotSubgraph(String),
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("metric is undefined: {0}")]
    UndefinedMetric(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
