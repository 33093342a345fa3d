use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature or Monte Carlo estimate did not reach its tolerance.
    #[error("accuracy error in {what}: estimated error {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    Accuracy {
        what: String,
        estimate: f64,
        tolerance: f64,
    },

    /// A profiled kernel whose radial multiplier does not tend to 1 at the origin.
    #[error("kernel admits no blow-up limit: {0}")]
    NoBlowUp(String),

    /// The interior-angle equation was requested outside its validity range.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// The Young deficit has the same sign at both ends of (0, pi).
    #[error("no interior solution: W(0+) = {lo:.6e}, W(pi-) = {hi:.6e}")]
    NoInteriorSolution { lo: f64, hi: f64 },

    /// A root bracket could not be established.
    #[error("range error: {0}")]
    Range(String),

    /// Two regions that must be disjoint share a set of positive measure.
    #[error("overlapping regions: {0}")]
    Overlap(String),

    /// The principal value does not exist at the requested point.
    #[error("principal value undefined: {0}")]
    PrincipalValue(String),

    /// Malformed or inconsistent input data.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A text table or raster could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
