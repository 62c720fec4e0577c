use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input failed a precondition (shapes, normalization, parameter ranges).
    #[error("validation error: {0}")]
    Validation(String),

    /// A local Fock cutoff cannot hold the requested state.
    #[error("capacity error at site {site}: {msg}")]
    Capacity { site: usize, msg: String },

    #[error("numerical error at site {site}: {msg}")]
    Numerical { site: usize, msg: String },

    /// A ratio or normalization with a vanishing denominator.
    #[error("undefined value: {0}")]
    Undefined(String),

    /// The MCWF jump probability per step exceeded the first-order guard.
    #[error("step size too large: total jump probability {total:.4} exceeds {limit}; reduce dt")]
    StepSize { total: f64, limit: f64 },

    #[error("demultiplexing inconsistency in iteration {iteration}, bin {bin}: {msg}")]
    Inconsistency { iteration: usize, bin: usize, msg: String },

    #[error("demultiplexing degeneracy in iteration {iteration}, bin {bin}: {msg}")]
    Degeneracy { iteration: usize, bin: usize, msg: String },

    #[error("layout error: {0}")]
    Layout(String),

    #[error("bond dimension {chi} at bond {bond} exceeds hard cap {cap}")]
    BondExplosion { bond: usize, chi: usize, cap: usize },

    #[error("quadrature error: {0}")]
    Quadrature(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("file format error: {0}")]
    Format(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from bad input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::Capacity { .. } | Error::Layout(_) | Error::Format(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
