use thiserror::Error;

/// Errors raised by the analytic, optimization and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations: {context}")]
    NonConvergence { iterations: usize, context: String },

    /// A queue with utilization at or above one (constraint C5).
    #[error("C5 stability violated at {stage}: utilization {rho:.6} >= 1")]
    Stability { stage: String, rho: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 2 for configuration problems, 3 for models that
    /// are infeasible or unstable.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => 2,
            Error::Domain(_)
            | Error::NonConvergence { .. }
            | Error::Stability { .. }
            | Error::Infeasible(_)
            | Error::EmptyInput(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
