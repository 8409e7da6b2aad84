use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes, lengths or indices that do not fit together.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// A size cap was exceeded (dense matrices, oracle dimension).
    #[error("resource limit: {0}")]
    Resource(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("unsupported element {element}: the built-in integral engine handles hydrogen only; supply the Hamiltonian as an interchange file instead")]
    UnsupportedElement { element: String },

    #[error("unsupported system: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("x = {x} lies outside the trained range [{low}, {high}]")]
    OutOfRange { x: f64, low: f64, high: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("Hamiltonian does not conserve particle number: {0}")]
    SectorViolation(String),

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Convergence(_) | Error::Optimization(_) => 3,
            Error::Resource(_) => 4,
            _ => 2,
        }
    }
}
