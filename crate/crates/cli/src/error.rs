use locsep::rat::RatParseError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown id `{id}`")]
    UnknownId { line: usize, id: String },
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: negative value `{text}`")]
    NegativeValue { line: usize, text: String },
    #[error("line {line}: `{text}` is not a canonical rational")]
    NonCanonicalRational { line: usize, text: String },
    #[error("certificate: {0}")]
    Certificate(String),
    #[error("witness: {0}")]
    Witness(String),
}

impl FormatError {
    pub(crate) fn syntax(line: usize, msg: impl Into<String>) -> Self {
        FormatError::Syntax {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn from_rat(line: usize, e: RatParseError) -> Self {
        match e {
            RatParseError::Syntax(text) => FormatError::syntax(line, format!("malformed rational `{text}`")),
            RatParseError::NonCanonical(text) => FormatError::NonCanonicalRational { line, text },
        }
    }
}
