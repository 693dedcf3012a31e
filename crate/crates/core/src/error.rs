use thiserror::Error;

/// Failures reported by the geometry kernel and the solvers built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point ({x}, {y}) is not in the upper half-plane")]
    OutsideHalfPlane { x: f64, y: f64 },

    #[error("Möbius coefficients have determinant {det}, need ad - bc > 0")]
    NotOrientationPreserving { det: f64 },

    #[error("geodesic initial velocity is zero")]
    ZeroVelocity,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("curve has {got} nodes, a {kind} curve needs at least {min}")]
    TooFewNodes {
        got: usize,
        min: usize,
        kind: &'static str,
    },

    #[error("nodes {index} and {next} coincide")]
    CoincidentNodes { index: usize, next: usize },

    #[error("degenerate finite-difference stencil at node {index}")]
    DegenerateStencil { index: usize },

    #[error("operation needs a closed curve")]
    OpenCurve,

    #[error("flow collapsed: t = {t} is past t_max = {t_max}")]
    Collapsed { t: f64, t_max: f64 },

    #[error("integration reached the ideal boundary at s = {s}")]
    IdealBoundary { s: f64 },

    #[error("evolution step failed at t = {t}: {source}")]
    StepFailed { t: f64, source: Box<Error> },

    #[error("lost positivity at grid index {index}, time {time}")]
    LostPositivity { index: usize, time: f64 },

    #[error("not enough data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
