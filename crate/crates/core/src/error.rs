use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curvature spec: {0}")]
    InvalidSpec(String),

    #[error("invalid integrator controls: {0}")]
    InvalidControls(String),

    #[error("series radius {r0:e} too large: remainder estimate {estimate:e} exceeds tolerance {tol:e}")]
    SeriesRadius { r0: f64, estimate: f64, tol: f64 },

    #[error("radius {r:e} outside profile range [{lo:e}, {hi:e}]")]
    OutOfRange { r: f64, lo: f64, hi: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no sign change of Λ(u0) - target found in u0 ∈ [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("profile is not converged (status {0})")]
    NotConverged(String),

    #[error("growth guard tripped at r = {r:e}: u = {u} exceeds u(0) + r²")]
    GrowthGuard { r: f64, u: f64 },

    #[error("root finder did not converge after {iterations} iterations (|f| = {residual:e})")]
    RootFinder { iterations: usize, residual: f64 },

    #[error("fit window too narrow: [{lo:e}, {hi:e}]")]
    WindowTooNarrow { lo: f64, hi: f64 },

    #[error("ratio sequence is not Cauchy: successive differences {0:?}")]
    FailedLimit(Vec<f64>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input rather than a failed computation.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec(_)
                | Error::InvalidControls(_)
                | Error::Precondition(_)
                | Error::SeriesRadius { .. }
                | Error::WindowTooNarrow { .. }
                | Error::OutOfRange { .. }
        )
    }
}
