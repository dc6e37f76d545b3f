use std::fmt;

use thiserror::Error;

use crate::structures::ClassTag;

/// First violated axiom of a structure or morphism check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub axiom: &'static str,
    pub detail: String,
}

impl Violation {
    pub fn new(axiom: &'static str, detail: impl Into<String>) -> Self {
        Violation {
            axiom,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated: {}", self.axiom, self.detail)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {what} needs {needed}, limit is {limit}")]
    Capacity {
        what: String,
        needed: String,
        limit: usize,
    },
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(Violation),
    #[error("invalid morphism: {0}")]
    InvalidMorphism(Violation),
    #[error("{what} is not supported for class {class}")]
    Unsupported { class: ClassTag, what: &'static str },
    #[error("budget exhausted at depth {depth}: {what}")]
    BudgetExhausted { depth: usize, what: String },
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn capacity(what: impl Into<String>, needed: impl fmt::Display, limit: usize) -> Self {
        Error::Capacity {
            what: what.into(),
            needed: needed.to_string(),
            limit,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
