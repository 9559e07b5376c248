//! Right-hand sides of the counting bounds, evaluated literally with a fixed
//! `ε` so they can serve as comparison targets with one fitted constant.

use serde::{Deserialize, Serialize};

use crate::arith::exact_sqrt;

/// Default `ε` in every `N^ε` factor.
pub const DEFAULT_EPS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MStarMode {
    /// Sum over all `l <= Λ`.
    General,
    /// Sum over square `l <= Λ`.
    Square,
    /// Sum of `l1 l²` over `l <= Λ` for a fixed `l1`.
    FixedL1TimesSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuMode {
    SinglePrime,
    TwoPrime,
    PrimeTimesSquare,
    BothSquares,
}

/// Generic-matrix census bound.
pub fn bound_mstar(level: f64, y: f64, delta: f64, mode: MStarMode, eps: f64) -> f64 {
    let n = level;
    let ne = n.powf(eps);
    match mode {
        MStarMode::General => (delta.powi(2) / (n * y) + delta.powi(3) / n.sqrt() + delta.powi(4) / n) * ne,
        MStarMode::Square | MStarMode::FixedL1TimesSquare => {
            (delta / (n * y) + delta.powi(2) / n.sqrt() + delta.powi(3) / n) * ne
        }
    }
}

/// Upper-triangular census bound; `lambda` scales the two-prime and
/// prime-times-square modes.
pub fn bound_mu(level: f64, y: f64, delta: f64, lambda: f64, mode: MuMode, eps: f64) -> f64 {
    let base = (1.0 + delta * level.sqrt() * y + delta * delta * y) * level.powf(eps);
    match mode {
        MuMode::SinglePrime | MuMode::BothSquares => base,
        MuMode::TwoPrime | MuMode::PrimeTimesSquare => lambda * base,
    }
}

/// Parabolic-sum bound `θ(l) 2^{-k} l^{(1-k)/2} (y + N^{-1/3} y^{1/3} + N^{-5/3} y^{-4/3} + N^{-1}) N^ε`.
pub fn bound_para(level: f64, y: f64, l: i64, k: u32, eps: f64) -> f64 {
    if l <= 0 || exact_sqrt(l).is_none() {
        return 0.0;
    }
    let n = level;
    let shape = y + n.powf(-1.0 / 3.0) * y.powf(1.0 / 3.0) + n.powf(-5.0 / 3.0) * y.powf(-4.0 / 3.0) + 1.0 / n;
    2f64.powi(-(k as i32)) * (l as f64).powf((1.0 - k as f64) / 2.0) * shape * n.powf(eps)
}
