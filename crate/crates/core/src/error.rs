use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid resolution {n_lon}x{n_lat}: {reason}")]
    InvalidResolution {
        n_lon: usize,
        n_lat: usize,
        reason: &'static str,
    },
    #[error("perturbation amplitude {0} makes the metric degenerate (need |eps| < 1)")]
    DegenerateMetric(f64),
    #[error("fields live on different charts")]
    ChartMismatch,
    #[error("operation `{op}` is not supported on the {chart} chart")]
    UnsupportedChart { op: &'static str, chart: &'static str },
    #[error("invalid truncation {truncation}: {reason}")]
    InvalidTruncation { truncation: usize, reason: String },
    #[error("field has nonzero mean coefficient {0:e}")]
    NonzeroMean(f64),
    #[error("field is not divergence free (residual {0:e})")]
    NotDivergenceFree(f64),
    #[error("Gram matrix is singular")]
    SingularGram,
    #[error("vector field is not Killing (relative S residual {0:e})")]
    NotKilling(f64),
    #[error("invalid config field `{field}`: {message}")]
    InvalidConfig { field: String, message: String },
    #[error("CFL violated at step {step}: dt = {dt:e} exceeds limit {limit:e}")]
    Cfl { step: usize, dt: f64, limit: f64 },
    #[error("non-finite values at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },
    #[error("decay fit needs at least 3 points in the window, got {0}")]
    TooFewPoints(usize),
    #[error("decay fit needs positive values, got {0:e}")]
    NonPositive(f64),
    #[error("pressure source violates solvability (relative mean {0:e})")]
    Solvability(f64),
    #[error("invalid initial condition: {0}")]
    InitialCondition(String),
}

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.to_string(),
            message: message.into(),
        }
    }
}
