use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("quadrature failed on [{lo}, {hi}]: estimated error {error:e} exceeds tolerance {tolerance:e}")]
    Quadrature {
        lo: f64,
        hi: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("outcome {outcome} at site {site} is impossible (probability {probability:e})")]
    ImpossibleOutcome {
        site: usize,
        outcome: u8,
        probability: f64,
    },

    #[error("forced MIE is not monotone on [0, π]: value drops at δφ = {at}")]
    NotMonotone { at: f64 },

    #[error("root not bracketed: S = {s} outside ({lo}, {hi})")]
    RootNotBracketed { s: f64, lo: f64, hi: f64 },

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),
}

impl Error {
    /// True for failures of the numerical machinery itself, as opposed to
    /// invalid inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence(_)
                | Error::Quadrature { .. }
                | Error::NotMonotone { .. }
                | Error::Eigen(_)
        )
    }
}
