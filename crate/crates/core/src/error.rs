use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("quadrature region selects no part of the grid")]
    EmptyRegion,

    #[error("point {x:?} at t = {t} lies outside the domain of {what}")]
    Domain { what: &'static str, x: Vec<f64>, t: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("time step {dt:e} exceeds the stability limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("linear solve did not converge after {iterations} iterations (residual {residual:e})")]
    LinearSolve { iterations: usize, residual: f64 },

    #[error("non-finite value encountered at t = {time}")]
    NonFinite { time: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no snapshot with interior neighbours at t = {0}")]
    Snapshot(f64),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
