use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("n = {n} exceeds the {available} maps the family provides")]
    NTooLarge { n: usize, available: usize },

    #[error("generation depth must be at least 1, got {0}")]
    InvalidDepth(usize),

    #[error("enumeration of {requested} items exceeds the budget of {budget}")]
    BudgetExceeded { requested: u128, budget: u128 },

    #[error("letter {letter} is outside 1..={n}")]
    LetterOutOfRange { letter: usize, n: usize },

    #[error("map index {index} is outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("operation requires a linear system")]
    NotLinear,

    #[error("operation requires a nonlinear family")]
    NotNonlinear,

    #[error("invalid interval [{0}, {1}]")]
    InvalidInterval(f64, f64),

    #[error("invalid exponent t = {0}")]
    InvalidT(f64),

    #[error("series diverges: {0}")]
    SeriesDivergence(String),

    #[error("closed form unavailable for family {0}")]
    Unavailable(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
