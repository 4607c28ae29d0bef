use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("singular tensor: |det| = {det:e} <= tol = {tol:e}")]
    SingularTensor { det: f64, tol: f64 },
    #[error("tensor is not positive definite: min eigenvalue {min_eig:e} <= tol = {tol:e}")]
    NotPositiveDefinite { min_eig: f64, tol: f64 },
    #[error("non-positive volume ratio: detF = {0:e}")]
    NonpositiveVolume(f64),
    #[error("pressure law evaluated at non-positive argument {0:e}")]
    NonpositiveArgument(f64),
    #[error("relaxation time must be positive, got {0:e}")]
    NonpositiveRelaxationTime(f64),
    #[error("finite-difference stencil left the admissible set after {attempts} step reductions")]
    InadmissiblePerturbation { attempts: usize },
    #[error("at least {required} samples are needed, got {got}")]
    InsufficientSamples { required: usize, got: usize },
    #[error("admissibility lost in cell {cell}: {reason}")]
    AdmissibilityLoss { cell: usize, reason: String },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(field: &str, message: impl Into<String>) -> Self {
        Error::Validation { field: field.to_string(), message: message.into() }
    }
}
