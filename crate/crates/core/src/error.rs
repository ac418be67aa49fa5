use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient budget exhausted: need {needed} coefficients, source certifies {available}")]
    CoefficientBudgetExhausted { needed: usize, available: usize },

    #[error("not irrational: {0}")]
    NotIrrational(String),

    #[error("theta out of range (0,1): {0}")]
    OutOfRange(String),

    #[error("invalid theta source: {0}")]
    InvalidTheta(String),

    #[error("digit cap exceeded: value has {digits} decimal digits, cap is {cap}")]
    DigitCapExceeded { digits: usize, cap: usize },

    #[error("search cap exceeded while searching for {what} at level {level}")]
    SearchCapExceeded { what: String, level: usize },

    #[error("undecidable comparison: {0}")]
    Undecidable(String),

    #[error("E-membership window failed at n = {n}")]
    EMembershipFailed { n: usize },

    #[error("no admissible m_{k} within coefficient window {window}")]
    MSequenceNotFound { k: usize, window: usize },

    #[error("telescoping blocks are not consecutive: {0}")]
    BlockNotConsecutive(String),

    #[error("sumset too large: {size} elements exceeds cap {cap}")]
    SumsetTooLarge { size: String, cap: usize },

    #[error("level {level} would hold about {estimate} cuts, above the cap {cap}")]
    CardinalityCapExceeded {
        level: usize,
        estimate: String,
        cap: usize,
    },

    #[error("certificate {name} failed at level {level}: {detail}")]
    CertificateFailed {
        level: usize,
        name: String,
        detail: String,
    },

    #[error("no tail majorant attached")]
    NoTailMajorant,

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Exit-code class used by the CLI: 1 runtime, 2 format/usage, 3 undecidable.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Undecidable(_) => 3,
            Error::Parse(_) | Error::Json(_) | Error::InvalidTheta(_) | Error::InvalidParams(_) => 2,
            _ => 1,
        }
    }
}
