use crate::geometry::CutSystem;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid input at `{field}`: {message}")]
    Invalid { field: String, message: String },

    #[error("scale guard exceeded: {0}")]
    ScaleGuard(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The premise of a partition theorem does not hold; the cut system is
    /// a partition none of whose d-cells satisfies the predicate.
    #[error("premise fails; counterexample partition {counterexample}")]
    PremiseFails { counterexample: CutSystem },

    #[error("layer sums are unbalanced (spread {spread:e} > tolerance {tol:e})")]
    Unbalanced { spread: f64, tol: f64 },

    #[error("epsilon loop did not stabilize within {levels} levels")]
    NoStabilization { levels: usize },

    /// A bound guaranteed by a theorem failed on an exactly computed object.
    #[error("bound violated: {0}")]
    BoundViolation(String),

    #[error("no witness found: {0}")]
    NoWitness(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}
