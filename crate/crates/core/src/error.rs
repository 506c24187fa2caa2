use thiserror::Error;

/// Errors raised by the exact-arithmetic toolkit.
///
/// Every variant maps to a stable short code (see [`Error::code`]) that the
/// command-line front end prints alongside the message.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands live in different fields ({0} vs {1})")]
    FieldMismatch(String, String),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("polynomial is not multilinear")]
    NotMultilinear,
    #[error("polynomial depends on {found} variables, at most {max} allowed")]
    TooManyVariables { found: usize, max: usize },
    #[error("variable x{0} labels more than one leaf")]
    NotReadOnce(usize),
    #[error("total degree {found} exceeds {max}")]
    DegreeTooHigh { found: u32, max: u32 },
    #[error("formula contains an addition gate")]
    NotMultiplicative,
    #[error("leaf of x{0} has zero scale")]
    DegenerateLeaf(usize),
    #[error("variable x{var} is not in the effective variable set")]
    NotEffective { var: usize },
    #[error("wrong arity: expected {expected}, found {found}")]
    WrongArity { expected: usize, found: usize },
    #[error("variable x{var} out of range for {nvars} variables")]
    VariableOutOfRange { var: usize, nvars: usize },
    #[error("expressible, but the square root of {0} is not representable exactly")]
    RootNotRepresentable(String),
    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),
    #[error("resource guard: {0}")]
    ResourceGuard(String),
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("malformed document: {0}")]
    Format(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "E_DIV_ZERO",
            Error::FieldMismatch(..) => "E_FIELD_MISMATCH",
            Error::NotPrime(_) => "E_NOT_PRIME",
            Error::NotMultilinear => "E_NOT_MULTILINEAR",
            Error::TooManyVariables { .. } => "E_TOO_MANY_VARS",
            Error::NotReadOnce(_) => "E_NOT_READ_ONCE",
            Error::DegreeTooHigh { .. } => "E_DEGREE",
            Error::NotMultiplicative => "E_NOT_MULTIPLICATIVE",
            Error::DegenerateLeaf(_) => "E_DEGENERATE_LEAF",
            Error::NotEffective { .. } => "E_NOT_EFFECTIVE",
            Error::WrongArity { .. } => "E_WRONG_ARITY",
            Error::VariableOutOfRange { .. } => "E_VAR_RANGE",
            Error::RootNotRepresentable(_) => "E_ROOT_NOT_REPRESENTABLE",
            Error::InternalInvariantViolation(_) => "E_INTERNAL",
            Error::ResourceGuard(_) => "E_RESOURCE_GUARD",
            Error::Syntax { .. } => "E_SYNTAX",
            Error::UnknownVariable(_) => "E_UNKNOWN_VARIABLE",
            Error::Format(_) => "E_FORMAT",
            Error::Io(_) => "E_IO",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
