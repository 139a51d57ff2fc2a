use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("scenario parse error: {0}")]
    ScenarioParse(String),

    #[error("scenario field `{field}` is invalid: {reason}")]
    ScenarioInvariant { field: String, reason: String },

    #[error("barrier gradient undefined at obstacle center ({cx}, {cy})")]
    SingularGradient { cx: f64, cy: f64 },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },

    #[error("no path from start to goal")]
    NoPath,

    #[error("planner failed: {0}")]
    PlannerFailed(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error("csv error: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
