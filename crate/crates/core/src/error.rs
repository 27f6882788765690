use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("negative slack {value} at constraint {row}, vertex {col}")]
    NegativeSlack {
        row: usize,
        col: usize,
        value: String,
    },

    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry {
        row: usize,
        col: usize,
        value: String,
    },

    #[error("not in pyramid form: {0}")]
    NotPyramid(String),

    #[error("neither factor is a pyramid")]
    NeitherPyramid,

    #[error("row {0} has no zero entry (redundant inequality)")]
    RedundantRow(usize),

    #[error("decomposition does not verify: {0}")]
    Unverified(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
