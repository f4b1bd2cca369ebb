use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),

    #[error("matrix is singular to working precision (pivot {pivot:.3e} below threshold {threshold:.3e})")]
    Singular { pivot: f64, threshold: f64 },

    #[error("condition estimate {estimate:.3e} exceeds limit {limit:.3e}")]
    IllConditioned { estimate: f64, limit: f64 },

    #[error("result contains a non-finite entry")]
    NonFinite,

    #[error("parameter {slot} shifted by {shift} is not invertible: {source}")]
    SingularParameter {
        slot: String,
        shift: i64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("point outside the guard region (growth rate {rate:.4} > limit {limit:.4})")]
    OutsideGuard { rate: f64, limit: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("unknown kind or entry: {0}")]
    Unknown(String),

    #[error("swap {0} is not an automorphism of the kind's signature")]
    NotAutomorphism(String),

    #[error("spectrum constraints are infeasible: {0}")]
    SpecInfeasible(String),

    #[error("catalog parse error at line {line}: {message}")]
    CatalogParse { line: usize, message: String },
}

impl Error {
    /// True for failures of a mathematical precondition (singularity, guard, hypotheses),
    /// as opposed to malformed input.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. }
                | Error::IllConditioned { .. }
                | Error::NonFinite
                | Error::SingularParameter { .. }
                | Error::OutsideGuard { .. }
                | Error::HypothesisViolation(_)
        )
    }
}
