use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} is not supported (expected 1..=5)")]
    UnsupportedDimension(u32),

    #[error("operation requires d >= 3, got d = {0}")]
    SubcriticalDimension(u32),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("kernel is singular at r = 0 in dimension {0}")]
    SingularPoint(u32),

    #[error("unsupported Bessel order {0}")]
    UnsupportedOrder(f64),

    #[error("{method} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("root not bracketed: f({lo}) = {f_lo:.3e}, f({hi}) = {f_hi:.3e}")]
    BracketFailure {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("linear system is singular (pivot {pivot:.3e} at row {row})")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("evolution unstable at t = {t}: max |u| = {max_abs:.3e} exceeds bound {bound:.3e}")]
    Instability { t: f64, max_abs: f64, bound: f64 },

    #[error("series must be strictly positive; found {value} at t = {t}")]
    NonPositiveSeries { t: f64, value: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("no path survived pinning at radius {radius}; use a larger ball or bridge sampling")]
    NoSurvivors { radius: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
