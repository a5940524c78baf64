use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs are well-formed numbers but violate a structural requirement
    /// (support outside the scanning strip, too few grid points, ...).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Diagonal of the discretized second-kind system is too close to zero.
    #[error("near-singular Volterra system at row {row}: |diagonal| = {diagonal:e}")]
    NearSingular { row: usize, diagonal: f64 },

    /// A 3-D kernel was evaluated with its radial variable below the guard.
    #[error("singularity guard tripped: R = {radius:e} below floor {floor:e}")]
    SingularityGuard { radius: f64, floor: f64 },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors raised by numerical guards rather than bad input.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(self, Error::NearSingular { .. } | Error::SingularityGuard { .. })
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
