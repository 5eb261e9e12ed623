use thiserror::Error;

use crate::config::WeightedConfig;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular linear system at {context}")]
    SingularSystem { context: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{op} requires loop topology")]
    LoopRequired { op: &'static str },

    /// A weight crossed zero during a step: the configuration left the space of
    /// nowhere-vanishing weights.
    #[error("weight of node {node} changed sign between t={t_before} and t={t_after}")]
    ModelExit {
        node: usize,
        t_before: f64,
        t_after: f64,
        last_valid: Box<WeightedConfig>,
    },

    #[error("non-finite state at t={t}: {what}")]
    Divergence {
        t: f64,
        what: String,
        last_valid: Option<Box<WeightedConfig>>,
    },

    #[error("step size underflow at t={t} (dt={dt:e})")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("unknown verify suite `{0}`")]
    UnknownSuite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code, used for CLI exit statuses and reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::SingularSystem { .. } => "singular_system",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::InvalidConfig(_) => "invalid_config",
            Error::LoopRequired { .. } => "loop_required",
            Error::ModelExit { .. } => "model_exit",
            Error::Divergence { .. } => "divergence",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::Schema(_) | Error::Json(_) => "schema",
            Error::UnknownPreset(_) => "unknown_preset",
            Error::UnknownSuite(_) => "unknown_suite",
            Error::Io(_) => "io",
        }
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
