use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received input outside its domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A point `(x, y)` left the strip `|y| < g/|g'|` on which `F` is defined.
    #[error("F domain violated at x = {x}: y = {y}, g = {g}, g' = {gprime}")]
    Domain { x: f64, y: f64, g: f64, gprime: f64 },

    /// Two independent routes to the same quantity disagree.
    #[error("internal inconsistency in {what}: {a} vs {b} (tolerance {tol})")]
    Inconsistent {
        what: &'static str,
        a: f64,
        b: f64,
        tol: f64,
    },

    /// A certified inequality or identity did not hold.
    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {flo}, f(hi) = {fhi}")]
    NoBracket { lo: f64, hi: f64, flo: f64, fhi: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
