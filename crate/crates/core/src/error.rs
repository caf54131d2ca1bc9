use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Position-tagged failure from the vector-field or foliation-file parsers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown variable `{name}` at line {line}, column {column}")]
    UnknownVariable {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("arity error at line {line}, column {column}: {message}")]
    Arity {
        line: usize,
        column: usize,
        message: String,
    },
}

impl ParseError {
    /// Shifts a single-line error onto `line`, offsetting the column.
    pub(crate) fn relocate(self, line: usize, column_offset: usize) -> Self {
        match self {
            ParseError::Syntax {
                column, message, ..
            } => ParseError::Syntax {
                line,
                column: column + column_offset,
                message,
            },
            ParseError::UnknownVariable { name, column, .. } => ParseError::UnknownVariable {
                name,
                line,
                column: column + column_offset,
            },
            ParseError::Arity {
                column, message, ..
            } => ParseError::Arity {
                line,
                column: column + column_offset,
                message,
            },
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("arity mismatch: expected {expected}, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("Gröbner budget exceeded: {0}")]
    Budget(String),
    #[error("trajectory left the domain box at t = {time}")]
    BlowUp { time: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("generator {index} is not a linear vector field")]
    Nonlinear { index: usize },
    #[error("flow words belong to different foliations")]
    SpecMismatch,
    #[error("i/o error: {0}")]
    Io(String),
    #[error("invalid numeric options: {0}")]
    Options(String),
}
