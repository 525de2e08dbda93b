use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate critical point at {location:?} (smallest |eigenvalue| {min_abs_eig:.3e})")]
    Degenerate {
        location: Vec<f64>,
        min_abs_eig: f64,
    },

    #[error("landscape assumption violated: {0}")]
    Assumption(String),

    #[error("no saddle points on the boundary")]
    NoSaddles,

    #[error("missing Agmon field for saddle {0}")]
    MissingAgmonField(String),

    #[error("empty boundary complement outside patch {0}")]
    EmptyComplement(String),

    #[error("no exit channel (total rate is zero)")]
    NoExitChannel,

    #[error("state diverged at step {step}")]
    Diverged { step: u64 },

    #[error("no exit after {steps} steps (simulated time {time:.6e})")]
    MaxStepsExceeded { steps: u64, time: f64 },

    #[error("eigen iteration did not converge after {iterations} iterations (relative change {change:.3e})")]
    NonConvergence { iterations: usize, change: f64 },

    #[error(
        "principal eigenvector has a negative component ({min:.3e}); eigenvalue may not be simple"
    )]
    NegativeEigenvector { min: f64 },

    #[error("grid too small: {0} nodes on an axis (need at least 8)")]
    GridTooSmall(usize),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
