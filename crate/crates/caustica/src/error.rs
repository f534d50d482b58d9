//! Error type shared by every module in the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by geometric constructions and numerical routines.
///
/// Variants are coarse on purpose: callers mostly branch on "bad input" vs
/// "the numerics gave up", and the message carries the specifics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input fails validation (off-model point, non-positive radius, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A construction is undefined for the given data (parallel tangents,
    /// intersection off the hyperbolic sheet, ...).
    #[error("construction failed: {0}")]
    Construction(String),

    /// An iterative solver (root find, shooting, Newton) did not converge.
    #[error("no convergence: {0}")]
    Convergence(String),

    /// A quantity left the domain where the algorithm is valid.
    #[error("domain exceeded: {0}")]
    Domain(String),

    /// The requested quantity is too ill-conditioned to compute reliably.
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    /// Operation not available for this surface kind or curve family.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A curve handed to a convexity-requiring construction is not convex.
    #[error("convexity violation: {0}")]
    Convexity(String),

    /// An internal cross-check failed (e.g. a measured slope disagrees with
    /// its closed-form prediction beyond tolerance).
    #[error("self-check failed: {0}")]
    SelfCheck(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
    pub fn construction(msg: impl Into<String>) -> Self {
        Error::Construction(msg.into())
    }
    pub fn convergence(msg: impl Into<String>) -> Self {
        Error::Convergence(msg.into())
    }
}
