use thiserror::Error;

/// Errors raised by the algebra, the semantics and the tooling built on them.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("not representable as an exact rational: {0}")]
    NotRepresentable(String),

    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("misuse: {0}")]
    Misuse(String),

    #[error("recursion unfold budget of {0} exceeded")]
    UnfoldBudget(usize),

    #[error("channel `{0}` occurs in the term but not in the state operator's channel set")]
    ChannelCoverage(String),

    #[error("term is not in head normal form: {0}")]
    NotHeadNormal(String),

    #[error("open term: free variable `{0}`")]
    OpenTerm(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
