use thiserror::Error;

/// Errors raised by the library.
///
/// Variants split into two families: validation errors (malformed inputs,
/// violated preconditions) and numerical failures (a computation that did
/// not converge or produced an out-of-tolerance residual). The CLI maps the
/// first family to exit code 2 and the second to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("matrix is not an isometry (residual {0:.3e})")]
    NotIsometry(f64),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid stochastic matrix: {0}")]
    InvalidStochastic(String),

    #[error("operator is not in the algebra (residual {0:.3e})")]
    NotInAlgebra(f64),

    #[error("state is not purifiable in this system: {0}")]
    NotPurifiable(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("resource bound exceeded: {0}")]
    ResourceExceeded(String),

    #[error("block decomposition failed: {0}")]
    Decomposition(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("tolerance violated: {0}")]
    Tolerance(String),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Decomposition(_) | Error::Numeric(_) | Error::Tolerance(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
