use thiserror::Error;

/// Errors produced by the numerics in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes do not agree.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// An input violated a documented precondition (non-Hermitian, non-unitary, bad step size, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A function was evaluated outside its domain (log of a negative eigenvalue,
    /// relative entropy with a support violation, free energy at beta <= 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The state carries no information about beta (all pointer energies coincide).
    #[error("zero Fisher information: pointer energies are constant")]
    ZeroInformation,

    /// A thermodynamic or information identity failed its residual check.
    #[error("internal consistency check `{check}` failed: residual {residual:.3e} exceeds {tolerance:.1e}")]
    Consistency {
        check: &'static str,
        residual: f64,
        tolerance: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
