//! Error type shared by every module.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or inconsistent input (ambient mismatch, bad parameters, wrong case).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// `remove` of an index that is not in the tuple.
    #[error("index {0} not present in tuple")]
    NotPresent(u8),
    /// `insert` of an index that is already in the tuple.
    #[error("index {0} already present in tuple")]
    AlreadyPresent(u8),
    /// Syntax error in an expression or algebra file.
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("unknown algebra `{0}`")]
    UnknownAlgebra(String),
    /// An expression mixes even and odd terms.
    #[error("parity-inhomogeneous expression: {0}")]
    ParityInhomogeneous(String),
    /// A requested computation is outside what the closed-form path handles.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// `[G_Λ G]` is not of super-Virasoro form; carries the residual.
    #[error("not a super Virasoro vector; residual: {0}")]
    NotSuperVirasoro(String),
    /// A Fourier transform input is not local within the degree cap.
    #[error("input is not local within cap: (z-w)^{0} does not annihilate it")]
    NotLocal(i64),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Error {
        Error::InvalidInput(msg.into())
    }

    /// Machine-readable category used by the command line front end.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) | Error::NotPresent(_) | Error::AlreadyPresent(_) => {
                "invalid-input"
            }
            Error::Syntax { .. } => "syntax",
            Error::UnknownGenerator(_) => "unknown-generator",
            Error::UnknownAlgebra(_) => "unknown-algebra",
            Error::ParityInhomogeneous(_) => "parity-inhomogeneous",
            Error::Unsupported(_) => "unsupported",
            Error::NotSuperVirasoro(_) => "not-super-virasoro",
            Error::NotLocal(_) => "not-local",
        }
    }
}
