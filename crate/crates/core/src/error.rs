use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("direction vector has (near) zero norm")]
    ZeroDirection,
    #[error("point coincides with the cone vertex")]
    DegenerateVertex,
    #[error("matrix is not symmetric positive definite: {0}")]
    NonSpdMatrix(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("helmet thickness requires 0 < a <= 1 <= b, got a = {a}, b = {b}")]
    BadThickness { a: f64, b: f64 },
    #[error("operation requires an avoidance mode (m = -1 or 1), got m = {0}")]
    BadMode(i8),
    #[error("{assumption} violated: {detail}")]
    AssumptionViolated {
        assumption: &'static str,
        detail: String,
    },
    #[error("delta = {delta} outside the admissible interval ({lower}, 1)")]
    BadDelta { delta: f64, lower: f64 },
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("rotation axis hint is (nearly) parallel to E c")]
    DegenerateHint,
    #[error("numerical solver failed: {0}")]
    SolverFailure(String),
    #[error("tuning failed: {0}")]
    TuningFailure(String),
    #[error("vehicle radius {radius} must be below the smallest obstacle distance {limit}")]
    InfeasibleVehicle { radius: f64, limit: f64 },
    #[error("state coincides with the center of obstacle {0} in avoidance mode")]
    DegenerateCenter(usize),
    #[error("jump map returned no candidates at x = {0:?}")]
    EmptyJump(Vec<f64>),
    #[error("transition bisection could not bracket a crossing")]
    NoBracket,
    #[error("initial condition {0:?} is not in the free workspace")]
    UnsafeStart(Vec<f64>),
    #[error("flow stalled at x = {0:?} (control input vanished away from the target)")]
    NonProgress(Vec<f64>),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("trajectory has no samples")]
    EmptyTrajectory,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
