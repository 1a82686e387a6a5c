use thiserror::Error;

impl Error {
    /// The underlying error, without source position.
    pub fn kind(&self) -> &Error {
        match self {
            Error::Located { inner, .. } => inner.kind(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("relation {relation} has arity {expected}, used with {found} arguments")]
    Arity { relation: String, expected: usize, found: usize },

    #[error("undeclared relation {0}")]
    UnknownRelation(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("unsafe tgd: variable {0} in the consequent is neither existential nor free in the antecedent")]
    UnsafeTgd(String),

    #[error("invalid constant {0:?}: {1}")]
    InvalidConstant(String, &'static str),

    #[error("unbound variable {0}")]
    UnboundVariable(String),

    #[error("query is not a conjunctive query: {0}")]
    NotConjunctive(String),

    #[error("formula still contains certain-answer nodes")]
    CertainPresent,

    #[error("malformed encoded value {0:?}")]
    Decode(String),

    #[error("{line}:{col}: {inner}")]
    Located { line: usize, col: usize, inner: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
