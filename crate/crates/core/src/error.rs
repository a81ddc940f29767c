use std::fmt;

use thiserror::Error;

/// A 1-based line/column position in parsed text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Pos, msg: String },

    /// Well-formed text whose content is inconsistent (unknown ids, arity clashes, ...).
    #[error("data error at {pos}: {msg}")]
    Data { pos: Pos, msg: String },

    #[error("no examples declared")]
    NoExamples,

    #[error("invalid query: {0}")]
    Query(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("class {class} has no training rows")]
    EmptyClass { class: usize },

    #[error("feature {feature} has degenerate probability {p} for class {class}; use smoothing > 0")]
    Degenerate { feature: usize, class: usize, p: f64 },

    #[error("fold {fold}: training split is missing class {class}")]
    FoldMissingClass { fold: usize, class: usize },

    #[error("model format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
}

impl Error {
    /// True for errors caused by bad parameters rather than bad data.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
