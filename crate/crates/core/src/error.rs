use thiserror::Error;

/// Errors raised by model construction, propagation and the LG pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M†| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("state vector is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("rate `{name}` must be nonnegative, got {value}")]
    NegativeRate { name: &'static str, value: f64 },

    #[error("time must be nonnegative, got {0} ps")]
    NegativeTime(f64),

    #[error("time interval must be strictly positive, got {0} ps")]
    NonPositiveInterval(f64),

    #[error("observables are defined for chromophore sites 1..=7, got {0}")]
    NotASite(String),

    #[error("site index {0} out of range 1..=7")]
    SiteOutOfRange(usize),

    #[error("correlator has imaginary residue {0:.3e}")]
    ImaginaryResidue(f64),

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("Table I has no closed form for initial state {state} measured at site {site}")]
    UnknownTableRow { state: String, site: usize },

    #[error("{0}")]
    InvalidArgument(String),
}

impl Error {
    /// Errors that indicate a numerical inconsistency rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::ImaginaryResidue(_) | Error::InvalidDensity(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
