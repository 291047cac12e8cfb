use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An index or parameter outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The secular function was evaluated inside the guard band of a pole.
    #[error("evaluation at {lambda:e} eV lies within {distance:e} eV of pole {pole}")]
    PoleProximity {
        lambda: f64,
        pole: usize,
        distance: f64,
    },

    /// A root bracket could not be established or refined.
    #[error("bracketing failed for root {index}: {detail}")]
    Bracketing { index: usize, detail: String },

    /// A quasi-energy coincides with a pole, so the eigenvector has no photon part.
    #[error("quasi-energy {0:e} eV coincides with a pole; eigenvector is singular")]
    SingularEigenvector(f64),

    /// A problem size beyond what the chosen engine can handle at desk scale.
    #[error("capacity exceeded: {what} = {requested} exceeds the cap {cap}")]
    Capacity {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    /// A numerical check did not meet its tolerance.
    #[error("tolerance not met: {0}")]
    Tolerance(String),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
