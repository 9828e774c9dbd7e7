use thiserror::Error;

/// Failure modes shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the documented domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A factorization or recurrence produced a non-positive quantity that
    /// must be positive (a Gram pivot, a squared norm).
    #[error("conditioning error: {0}")]
    Conditioning(String),

    /// Extended-precision arithmetic ran out of significant bits.
    #[error("precision error: {0}")]
    Precision(String),

    /// The request is valid but outside what the chosen route supports.
    #[error("capability error: {0}")]
    Capability(String),

    /// Root finding or another iteration failed.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Two discretization levels disagree by more than the tolerance.
    #[error("accuracy error: {message} (coarse {coarse}, fine {fine})")]
    Accuracy {
        message: String,
        coarse: f64,
        fine: f64,
    },

    /// The sigma-form integrator could not continue.
    #[error("integration error at t = {t}: {message}")]
    Integration { t: f64, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
