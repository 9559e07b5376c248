//! Census-to-bound ratios for the counting bounds at one `(z, N, δ)`.
//!
//! Sums over `l` run up to `Λ_range = ⌊δ²/4⌋`, beyond which every census is
//! empty, so each bound's left-hand side is complete. Prime-indexed sums run
//! over distinct values of the product.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::bounds::{bound_mstar, bound_mu, bound_para, MStarMode, MuMode};
use super::{enumerate_dets, parabolic_sum, CountSplit};
use crate::arith::{exact_sqrt, factorize};
use crate::error::Result;
use crate::hyp::{classify, HPoint};

/// Fixed `l1` of the `l1 l²` generic sum.
pub const FIXED_L1: i64 = 2;

/// Square determinants and weights of the parabolic comparison.
pub const PARA_DETS: [i64; 4] = [1, 4, 9, 25];
pub const PARA_WEIGHTS: [u32; 2] = [4, 6];

/// Tail tolerance of each parabolic sum, relative to its bound.
const PARA_REL_TAIL: f64 = 1e-6;

/// One census and the bound it is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub census: f64,
    pub bound: f64,
}

impl Comparison {
    pub fn ratio(&self) -> f64 {
        self.census / self.bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformanceRow {
    pub z: HPoint,
    pub level: u64,
    pub delta: f64,
    pub lambda_range: i64,
    /// General, square, fixed `l1` times square.
    pub generic: [Comparison; 3],
    /// Single prime, two primes, prime times square, two squares.
    pub upper: [Comparison; 4],
    /// One entry per `(l, k)` of `PARA_DETS × PARA_WEIGHTS`.
    pub parabolic: Vec<Comparison>,
}

/// Splits of `G_l(N)` censuses keyed by `l` for `l_lo <= l <= l_hi`.
pub fn census_by_det(z: HPoint, level: i64, l_lo: i64, l_hi: i64, delta: f64) -> BTreeMap<i64, CountSplit> {
    let mut by_det: BTreeMap<i64, CountSplit> = BTreeMap::new();
    for m in enumerate_dets(z, level, l_lo, l_hi, delta) {
        let l = m.det();
        by_det.entry(l).or_default().add(classify(&m, l).expect("det matches"));
    }
    by_det
}

/// Index of the upper-triangular sum `l` belongs to: `p`, `p q`, `p q²`,
/// `p² q²` (primes not necessarily distinct).
fn upper_class(l: i64) -> Option<usize> {
    let mut exps: Vec<u32> = factorize(l as u64).iter().map(|&(_, e)| e).collect();
    exps.sort_unstable();
    match exps.as_slice() {
        [1] => Some(0),
        [2] | [1, 1] => Some(1),
        [3] | [1, 2] => Some(2),
        [4] | [2, 2] => Some(3),
        _ => None,
    }
}

pub fn conformance_row(z: HPoint, level: u64, delta: f64, eps: f64) -> Result<ConformanceRow> {
    let lam = ((delta * delta / 4.0).floor() as i64).max(1);
    let by_det = census_by_det(z, level as i64, 1, lam, delta);
    let get = |l: i64| by_det.get(&l).copied().unwrap_or_default();
    let n = level as f64;
    let y = z.y;

    let m_star_all: u64 = by_det.values().map(|s| s.m_star).sum();
    let m_star_sq: u64 = by_det.iter().filter(|(&l, _)| exact_sqrt(l).is_some()).map(|(_, s)| s.m_star).sum();
    let m_star_l1: u64 = (1..).map(|l: i64| FIXED_L1 * l * l).take_while(|&d| d <= lam).map(|d| get(d).m_star).sum();
    let generic = [
        Comparison { census: m_star_all as f64, bound: bound_mstar(n, y, delta, MStarMode::General, eps) },
        Comparison { census: m_star_sq as f64, bound: bound_mstar(n, y, delta, MStarMode::Square, eps) },
        Comparison { census: m_star_l1 as f64, bound: bound_mstar(n, y, delta, MStarMode::FixedL1TimesSquare, eps) },
    ];

    let mut mu = [0u64; 4];
    for (&l, s) in &by_det {
        if let Some(c) = upper_class(l) {
            mu[c] += s.m_upper;
        }
    }
    let lam_f = lam as f64;
    let upper = [
        Comparison { census: mu[0] as f64, bound: bound_mu(n, y, delta, lam_f, MuMode::SinglePrime, eps) },
        Comparison { census: mu[1] as f64, bound: bound_mu(n, y, delta, lam_f, MuMode::TwoPrime, eps) },
        Comparison { census: mu[2] as f64, bound: bound_mu(n, y, delta, lam_f, MuMode::PrimeTimesSquare, eps) },
        Comparison { census: mu[3] as f64, bound: bound_mu(n, y, delta, lam_f, MuMode::BothSquares, eps) },
    ];

    let mut parabolic = Vec::new();
    for &l in &PARA_DETS {
        for &k in &PARA_WEIGHTS {
            let bound = bound_para(n, y, l, k, eps);
            let s = parabolic_sum(z, level, l, k, PARA_REL_TAIL * bound)?;
            parabolic.push(Comparison { census: s.value, bound });
        }
    }
    Ok(ConformanceRow { z, level, delta, lambda_range: lam, generic, upper, parabolic })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_is_consistent_with_single_windows() {
        let z = HPoint::new(0.23, 0.31).unwrap();
        let by_det = census_by_det(z, 5, 1, 30, 11.0);
        for l in [1i64, 2, 4, 6, 9, 12, 25] {
            let w = super::super::EnumWindow::new(z, 5, l, 11.0).unwrap();
            assert_eq!(by_det.get(&l).copied().unwrap_or_default(), super::super::count_split(&w).unwrap());
        }
        let row = conformance_row(z, 5, 11.0, 0.1).unwrap();
        assert_eq!(row.lambda_range, 30);
        assert_eq!(row.parabolic.len(), PARA_DETS.len() * PARA_WEIGHTS.len());
        assert!(row.generic.iter().chain(&row.upper).all(|c| c.bound > 0.0 && c.census >= 0.0));
    }
}
