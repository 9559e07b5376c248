use thiserror::Error;

use crate::qseries::HeckeReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point is not in the upper half-plane (y = {0})")]
    NotInUpperHalfPlane(f64),

    #[error("matrix determinant must be positive, got {0}")]
    NonPositiveDeterminant(i64),

    #[error("matrix determinant {det} does not match l = {l}")]
    DeterminantMismatch { det: i64, l: i64 },

    #[error("internal consistency violation: {0}")]
    Inconsistent(String),

    #[error("lattice basis is degenerate")]
    DegenerateLattice,

    #[error("level {0} is not square-free")]
    NotSquareFree(u64),

    #[error("{r} does not divide level {n}")]
    NotADivisor { r: u64, n: u64 },

    #[error("reduction exceeded the move budget of {budget} moves")]
    MoveBudgetExceeded { budget: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is not a perfect square")]
    NotASquare(i64),

    #[error("weight {0} is not supported here (need an even weight >= 4)")]
    UnsupportedWeight(u32),

    #[error("eta quotient is not integral at infinity: sum of d*e = {0} is not divisible by 24")]
    EtaNotIntegral(i64),

    #[error("eta quotient is not a cusp form at infinity (leading exponent {0})")]
    EtaNotCuspidal(i64),

    #[error("coefficient arithmetic overflowed at index {0}")]
    Overflow(usize),

    #[error("index {n} exceeds truncation length {m}")]
    IndexOutOfRange { n: usize, m: usize },

    #[error("truncation insufficient: {m} coefficients cannot certify tail {tol:e} at y = {y}")]
    TruncationInsufficient { m: usize, tol: f64, y: f64 },

    #[error("tail estimate {tail:e} exceeds the requested tolerance {tol:e}")]
    TailTooLarge { tail: f64, tol: f64 },

    #[error("quadrature did not reach tolerance {tol:e} within budget (estimate {estimate:e})")]
    QuadratureBudget { tol: f64, estimate: f64 },

    #[error("coefficient table rejected: Hecke check failed ({0:?})")]
    HeckeRejected(HeckeReport),

    #[error("coefficient table rejected: {0}")]
    BadTable(String),

    #[error("unknown form id {0:?}")]
    UnknownForm(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
