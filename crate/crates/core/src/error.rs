use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("step sequence must be non-empty and of even length, got {0} steps")]
    InvalidLength(usize),
    #[error("path must start at 0, found {0}")]
    NonZeroStart(i64),
    #[error("bad step at index {index}: {from} -> {to}")]
    BadStep { index: usize, from: i64, to: i64 },
    #[error("path has an odd number of steps ({0})")]
    OddLength(usize),
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("n = {n} exceeds the exhaustive limit {limit}; pass --limit-override to raise it")]
    LimitExceeded { n: usize, limit: usize },
    #[error("family {set} is empty at n = {n}")]
    EmptyFamily { set: String, n: usize },
    #[error("{map} is not defined on {path}: expected a member of {expected}")]
    NotInDomain {
        map: &'static str,
        path: String,
        expected: &'static str,
    },
    #[error("{map} needs n >= 2, got n = {n}")]
    NTooSmall { map: &'static str, n: usize },
    #[error("paths differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
