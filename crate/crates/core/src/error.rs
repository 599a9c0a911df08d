use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix exponential did not converge within {0} Taylor terms")]
    NoConvergence(usize),

    /// A density-matrix invariant failed; `check` names the failing test.
    #[error("invalid state [{check}]: {detail}")]
    InvalidState { check: &'static str, detail: String },

    #[error("parameter `{name}` out of range: {detail}")]
    OutOfRange { name: &'static str, detail: String },

    #[error("N = {n} exceeds the configured maximum of {max} qubits")]
    TooManyQubits { n: usize, max: usize },

    /// Numerical drift detected while integrating or simulating.
    #[error("numerical invariant violated: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn range(name: &'static str, detail: impl Into<String>) -> Self {
        Error::OutOfRange { name, detail: detail.into() }
    }

    pub(crate) fn state(check: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidState { check, detail: detail.into() }
    }

    /// True for failures of numeric invariants, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_) | Error::NoConvergence(_))
    }
}
