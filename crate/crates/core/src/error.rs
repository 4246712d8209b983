use thiserror::Error;

/// Errors raised by the arithmetic, evaluation and analysis engines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("even root of a negative number")]
    NegativeBase,
    #[error("coefficient is not rational in exact mode: {0} (try the decimal backend)")]
    IrrationalCoefficient(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("standard part undefined: {0}")]
    Undefined(String),
    #[error("undecidable: {0}")]
    Undecidable(String),
    #[error("unsupported escape combination: {0}")]
    UnsupportedEscape(String),
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("{path}: {source}")]
    Eval { path: String, source: Box<Error> },
}

impl Error {
    /// The innermost error, with any evaluation-path wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Eval { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for errors that mean "this point is outside the function's domain".
    pub fn is_domain(&self) -> bool {
        matches!(
            self.root(),
            Error::Domain(_) | Error::DivisionByZero | Error::NegativeBase
        )
    }

    pub fn is_precision(&self) -> bool {
        matches!(self.root(), Error::InsufficientPrecision(_))
    }

    pub(crate) fn precision(msg: impl Into<String>) -> Self {
        Error::InsufficientPrecision(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::UnsupportedEscape(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
