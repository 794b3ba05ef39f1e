use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    /// A parameter or index outside the domain of an operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Normalizing a state whose tensor is identically zero.
    #[error("degenerate state: cannot normalize a zero-norm state")]
    DegenerateState,

    /// Truncation loss above the bound an experiment promised to respect.
    #[error("leakage {leakage:e} exceeds bound {bound:e} ({context})")]
    LeakageExceeded {
        leakage: f64,
        bound: f64,
        context: String,
    },
}

impl SimError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        SimError::InvalidArgument(msg.into())
    }

    /// Short machine-readable tag used by the CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            SimError::InvalidArgument(_) => "invalid-argument",
            SimError::DegenerateState => "degenerate-state",
            SimError::LeakageExceeded { .. } => "leakage-exceeded",
        }
    }
}

pub type SimResult<T> = Result<T, SimError>;
