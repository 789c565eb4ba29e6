use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature did not converge: estimated error {estimate:.3e} after {intervals} subintervals")]
    Quadrature { estimate: f64, intervals: usize },

    #[error("classification failed for shape `{shape}`: {reason}")]
    Classification { shape: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:.6e}, f(hi) = {f_hi:.6e}")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("eigensolver did not converge after {restarts} restarts (best residual {residual:.3e})")]
    EigenNoConvergence { restarts: usize, residual: f64 },

    #[error("no bound state: {0}")]
    NoBoundState(String),

    #[error("unknown shape `{0}`")]
    UnknownShape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
