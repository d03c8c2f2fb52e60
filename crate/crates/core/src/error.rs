use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation (non-unit, non-residue, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed or inadmissible argument.
    #[error("argument error: {0}")]
    Argument(String),
    /// Working precision too small; `required` is the number of p-adic digits needed.
    #[error("precision exhausted: need {required} digits, have {available}")]
    Precision { required: u32, available: u32 },
    /// Hom set is empty for parity reasons (odd total determinant valuation).
    #[error("parity: total determinant valuation {0} is odd")]
    Parity(i64),
    /// A computed object violates an invariant that should hold by construction.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    /// Search for a required object came back empty.
    #[error("not found: {0}")]
    NotFound(String),
    /// More than one candidate where exactly one was required.
    #[error("ambiguous: {0}")]
    Ambiguous(String),
    /// Failure inside a numbered pipeline step.
    #[error("step {step}: {source}")]
    Step { step: u32, source: Box<Error> },
}

impl Error {
    /// Innermost error, looking through step wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn at_step(self, step: u32) -> Error {
        Error::Step { step, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
