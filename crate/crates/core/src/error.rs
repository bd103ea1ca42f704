use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("push-label did not converge within {rounds} rounds")]
    Unconverged { rounds: usize },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! input_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Input(format!($($arg)*))
    };
}
pub(crate) use input_err;
