use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precision: {0}")]
    Precision(String),
    #[error("undecidable at working precision: {0}")]
    Undecidable(String),
    #[error("division by an element that is zero at its precision")]
    DivisionByZero,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("hypothesis not met: {0}")]
    Hypothesis(String),
    #[error("rational recognition failed for {value} (denominator bound {bound})")]
    Recognition { value: String, bound: u64 },
    #[error("insufficient level: n = {have}, need n >= {need} for the requested precision")]
    Level { have: u32, need: u32 },
    #[error("AGM did not converge after {0} iterations")]
    Agm(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
