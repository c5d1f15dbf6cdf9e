use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular point: {0}")]
    Singular(String),

    #[error("series or iteration did not converge: {0}")]
    NonConvergence(String),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("rejection sampler exceeded {cap} attempts")]
    RejectionCapExceeded { cap: u64 },

    #[error("tree hit its growth guard; the solution process is undefined on it")]
    GuardHitTree,

    #[error("amplitude is not orthogonal to its wavevector (|k.a| / |k||a| = {0:e})")]
    OrthogonalityViolated(f64),

    #[error("initial data is not a radial vortex profile: {0}")]
    NotVortexData(String),

    #[error("initial data must be nonnegative: {0}")]
    NegativeInitialData(String),

    #[error("malformed initial-data table: {0}")]
    MalformedTable(String),

    #[error("interpolation grid does not cover {0}")]
    GridCoverage(String),

    #[error("bound violated at {witness}: {detail}")]
    BoundViolated { witness: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerics themselves (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence(_)
                | Error::Divergent(_)
                | Error::Quadrature(_)
                | Error::RejectionCapExceeded { .. }
                | Error::Singular(_)
        )
    }
}
