use thiserror::Error;

/// Errors produced across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {0} lies outside the branch domain arg z in (-pi/2, 3pi/2)")]
    BranchDomain(String),
    #[error("singular argument: {0}")]
    Singularity(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("spectral parameter at (or numerically indistinguishable from) the spectrum: wronskian {wronskian:e}")]
    AtSpectrum { wronskian: f64 },
    #[error("construction error: {0}")]
    Construction(String),
    #[error("invalid contour specification: {0}")]
    Spec(String),
    #[error("quadrature did not converge: achieved error estimate {achieved:e}, requested {requested:e}")]
    Accuracy { achieved: f64, requested: f64 },
    #[error("degenerate least-squares fit (condition number {condition:e})")]
    FitDegeneracy { condition: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("unstable time step: {0}")]
    Stability(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("spectral quadrature refinement limit reached near zero (achieved {achieved:e})")]
    RefinementLimit { achieved: f64 },
    #[error("incomplete decomposition: {0}")]
    IncompleteSplit(String),
    #[error("branch or orientation error: imaginary residual {0:e}")]
    Orientation(f64),
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
