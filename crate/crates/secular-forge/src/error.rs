use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("planet index {index} out of range (have {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular chart: {0}")]
    SingularChart(String),
    #[error("kepler solver did not converge (e = {e}, rhs = {rhs})")]
    NoConvergence { e: f64, rhs: f64 },
    #[error("quadrature not converged: node doubling changed value by {change:e} (relative)")]
    Quadrature { change: f64 },
    #[error("resonance: divisor {divisor:e} below tolerance for monomial {monomial:?}")]
    Resonance { divisor: f64, monomial: [u8; 6] },
    #[error("series error: {0}")]
    Series(String),
    #[error("collision or close encounter: {0}")]
    Encounter(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
