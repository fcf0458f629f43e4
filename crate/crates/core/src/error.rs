use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("unstable stratification: theta1 = {theta1}, theta2 = {theta2} (densities must satisfy rho3 > rho2 > rho1)")]
    UnstableStratification { theta1: f64, theta2: f64 },
    #[error("non-finite sample in {0}")]
    NonFinite(&'static str),
    #[error("window violation: max |value| on the outer 10% is {max_edge:e} > tol {tol:e}")]
    WindowViolation { max_edge: f64, tol: f64 },
    #[error("interface collision: gap = {gap:e}")]
    InterfaceCollision { gap: f64 },
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("invertibility failure ({reason}): condition estimate {cond_estimate:e}, neumann radius {neumann_radius:?}")]
    InvertibilityFailure {
        reason: String,
        cond_estimate: f64,
        neumann_radius: Option<f64>,
    },
    #[error("evaluation refused at ({x}, {y}): within {distance:e} of an interface, use trace_at")]
    EvaluationRefused { x: f64, y: f64, distance: f64 },
    #[error("region mismatch: point lies in {found}, requested {requested}")]
    RegionMismatch { requested: String, found: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
