use thiserror::Error;

/// Errors raised by the analysis routines.
///
/// The variants map one-to-one onto the CLI exit codes: parameter errors
/// (including unreadable or malformed input files) exit with 2, violated
/// preconditions with 3, and numerical failures with 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("edge list line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Format { .. } | Error::Io(_) => 2,
            Error::Precondition(_) => 3,
            Error::Numeric(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure_param {
    ($cond:expr, $($arg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err($crate::error::Error::Parameter(format!($($arg)+)));
        }
    };
}

macro_rules! ensure_pre {
    ($cond:expr, $($arg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err($crate::error::Error::Precondition(format!($($arg)+)));
        }
    };
}

pub(crate) use ensure_param;
pub(crate) use ensure_pre;
