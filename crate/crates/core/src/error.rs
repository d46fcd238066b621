use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Caller supplied something outside an operation's domain.
    #[error("invalid input `{param}`: {reason}")]
    Input { param: &'static str, reason: String },

    #[error("dimension mismatch in `{param}`: expected {expected}, found {found}")]
    DimensionMismatch {
        param: &'static str,
        expected: usize,
        found: usize,
    },

    /// The Killing form is degenerate or indefinite where a definite form is required.
    #[error("unsupported algebra: {0}")]
    UnsupportedAlgebra(String),

    /// A complex handed to a cohomology routine does not square to zero.
    #[error("differential is not nilpotent at degree {degree}")]
    NotNilpotent { degree: usize },

    /// An identity that a constructed object must satisfy failed.
    #[error("construction failed: {identity} violated at bidegree ({p}, {q})")]
    Construction {
        identity: &'static str,
        p: usize,
        q: usize,
    },

    #[error("degenerate constraint: co-moment vanishes at site {site}")]
    DegenerateConstraint { site: usize },

    #[error("non-finite value encountered at step {step}")]
    BlowUp { step: usize },
}

impl Error {
    pub(crate) fn input(param: &'static str, reason: impl Into<String>) -> Self {
        Error::Input {
            param,
            reason: reason.into(),
        }
    }

    pub(crate) fn mismatch(param: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            param,
            expected,
            found,
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
