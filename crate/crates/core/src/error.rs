use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: ({l1}, {n1}) vs ({l2}, {n2})")]
    GridMismatch { l1: f64, n1: usize, l2: f64, n2: usize },

    #[error("operation requires the {expected} model, got {got}")]
    WrongModel { expected: &'static str, got: &'static str },

    #[error("B-_{{n,0}} vanishes identically; no minus-parity basis member at nu = 0")]
    DegenerateBasis,

    #[error("decay constant {0} is not positive; the half-line transform does not converge")]
    NonPositiveDecay(f64),

    #[error("series value {value} at index {index} is not positive")]
    NonPositiveSeries { index: usize, value: f64 },

    #[error("series too short for a fit ({0} points)")]
    SeriesTooShort(usize),

    #[error("time step {dt} exceeds stability bound {bound}")]
    StabilityBound { dt: f64, bound: f64 },

    #[error("horizon {t_end} exceeds {limit} for anti-diffusive (beta < 0) evolution")]
    HorizonTooLong { t_end: f64, limit: f64 },

    #[error("initial trace is zero; normalized evolution undefined")]
    ZeroTrace,

    #[error("numerical instability at t = {t}: max|W| grew by {growth:e}")]
    Instability { t: f64, growth: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
