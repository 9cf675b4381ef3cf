use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("adjacency matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),

    #[error("adjacency matrix has a non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("symmetric eigensolver did not converge (n = {0})")]
    EigenNoConvergence(usize),

    #[error("eigenvalue group structure differs: {0}")]
    GroupMismatch(String),

    #[error("sparsity mask leaves some row or column without an allowed entry")]
    InfeasibleMask,

    #[error("n = {n} exceeds the enumeration limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("restart {restart}: {source}")]
    Restart {
        restart: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("graph file line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
