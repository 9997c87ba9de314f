use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the domain of a function (zero modulus, left half-plane, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameter or list violating a constructor invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid overflow: required {required} samples exceeds cap {cap}")]
    GridOverflow { required: u64, cap: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("sampling-rate mismatch: kernel dt = {kernel_dt}, signal dt = {signal_dt}")]
    RateMismatch { kernel_dt: f64, signal_dt: f64 },

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
            _ => Error::Format(e.to_string()),
        }
    }
}
