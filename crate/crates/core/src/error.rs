use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}:{col}: use of undeclared variable `{name}`")]
    Undeclared {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: non-linear expression: {msg}")]
    NonLinear {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}:{col}: variable `{name}` declared twice")]
    Redeclared {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("enumeration of {count} states exceeds the cap of {cap}")]
    EnumerationTooLarge { count: u128, cap: u128 },
    #[error("arithmetic overflow")]
    Overflow,
    #[error("unknown domain `{0}` (expected interval, octagon, congruence or comp)")]
    UnknownDomain(String),
    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
