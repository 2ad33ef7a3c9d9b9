use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter range violation: {0}")]
    RangeViolation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge on [{a}, {b}] (estimate {estimate}, error {error})")]
    QuadratureNonConvergence { a: f64, b: f64, estimate: f64, error: f64 },
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("grading error: {0}")]
    Grading(String),
    #[error("Newton iteration diverged at t = {t} with dt = {dt}")]
    NewtonDivergence { t: f64, dt: f64 },
    #[error("nonphysical state: {0}")]
    Nonphysical(String),
    #[error("no extinction detected before t = {t_end}")]
    NotExtinct { t_end: f64 },
    #[error("datum vanishes identically on the ball")]
    ZeroDatum,
    #[error("exponent {s} is outside the admissible window (limit {limit})")]
    ThresholdExceeded { s: f64, limit: f64 },
    #[error("regularity error: {0}")]
    Regularity(String),
    #[error("infimum vanishes at t = {t}")]
    ZeroInfimum { t: f64 },
    #[error("only {found} usable samples, {needed} needed")]
    InsufficientSamples { found: usize, needed: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
