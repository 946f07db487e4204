use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("elements belong to different field contexts ({0} vs {1})")]
    ContextMismatch(u32, u32),

    #[error("{0} is undefined for the zero element")]
    ZeroElement(&'static str),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("no subfield of size {p}^{degree} inside GF({p}^{n})")]
    InvalidSubfield { p: u32, degree: u32, n: u32 },

    #[error("invalid code parameters: {0}")]
    InvalidSpec(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("element is not representable in its block: {0}")]
    NotRepresentable(String),

    #[error("enumeration budget exceeded: need {needed}, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
