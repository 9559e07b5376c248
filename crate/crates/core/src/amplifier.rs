//! Amplifier over the prime set `Λ = {p prime : L <= p < 2L, p ∤ N}`: signs
//! `x_l` on `Λ ∪ Λ²`, the Hecke convolution `y_l` and the amplifier value.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::{divisors, gcd, primes_below};
use crate::error::{Error, Result};

/// Largest `L` accepted; keeps `p⁴` within 64 bits.
pub const MAX_L: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmpSupport {
    #[serde(rename = "L")]
    pub big_l: f64,
    pub level: u64,
    pub primes: Vec<u64>,
}

impl AmpSupport {
    /// `Λ ∪ Λ²` in increasing order.
    pub fn indices(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.primes.iter().flat_map(|&p| [p, p * p]).collect();
        v.sort_unstable();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmpVector {
    pub x: BTreeMap<u64, i64>,
    pub y: BTreeMap<u64, i64>,
}

/// Where `l` sits in the support of `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportClass {
    One,
    /// `l1 = p`.
    Prime,
    /// `l1 l2`, including `p²`.
    TwoPrimes,
    /// `l1 l2²`, including `p³`.
    PrimeTimesSquare,
    /// `l1² l2²`, including `p⁴`.
    TwoSquares,
}

pub fn build_support(big_l: f64, level: u64) -> Result<AmpSupport> {
    if !(big_l >= 2.0) || big_l > MAX_L {
        return Err(Error::InvalidParameter(format!("L must lie in [2, {MAX_L}], got {big_l}")));
    }
    if level == 0 {
        return Err(Error::InvalidParameter("level must be positive".into()));
    }
    let hi = (2.0 * big_l).ceil() as u64;
    let primes = primes_below(hi)
        .into_iter()
        .filter(|&p| p as f64 >= big_l && (p as f64) < 2.0 * big_l && !level.is_multiple_of(p))
        .collect();
    Ok(AmpSupport { big_l, level, primes })
}

/// `sign(t)` with `sign(0) = +1`.
fn sign(t: f64) -> i64 {
    if t < 0.0 {
        -1
    } else {
        1
    }
}

/// `x_l = sign(λ(l))` on `Λ ∪ Λ²`.
pub fn build_x(lambda: impl Fn(u64) -> f64, support: &AmpSupport) -> BTreeMap<u64, i64> {
    support.indices().into_iter().map(|l| (l, sign(lambda(l)))).collect()
}

/// `y_l = Σ_{d | (l1, l2), l = l1 l2 / d²} x_{l1} x_{l2}`; zero entries are dropped.
pub fn convolve_y(x: &BTreeMap<u64, i64>) -> BTreeMap<u64, i64> {
    let mut y: BTreeMap<u64, i64> = BTreeMap::new();
    for (&l1, &x1) in x {
        for (&l2, &x2) in x {
            for d in divisors(gcd(l1 as i64, l2 as i64) as u64) {
                *y.entry(l1 / d * (l2 / d)).or_default() += x1 * x2;
            }
        }
    }
    y.retain(|_, v| *v != 0);
    y
}

/// Signs and convolution for the eigenvalues `λ`.
pub fn amplifier(lambda: impl Fn(u64) -> f64, support: &AmpSupport) -> AmpVector {
    let x = build_x(lambda, support);
    let y = convolve_y(&x);
    AmpVector { x, y }
}

/// `Σ_l x_l λ(l)` over `Λ ∪ Λ²`.
pub fn amp_lower(lambda: impl Fn(u64) -> f64, support: &AmpSupport) -> f64 {
    support
        .indices()
        .into_iter()
        .map(|l| {
            let v = lambda(l);
            sign(v) as f64 * v
        })
        .sum()
}

/// Classify `l` against the prime set.
pub fn support_class(l: u64, primes: &[u64]) -> Option<SupportClass> {
    if l == 1 {
        return Some(SupportClass::One);
    }
    let mut exps = Vec::new();
    let mut rest = l;
    for &p in primes {
        let mut e = 0;
        while rest.is_multiple_of(p) {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            exps.push(e);
        }
    }
    if rest != 1 {
        return None;
    }
    exps.sort_unstable();
    match exps.as_slice() {
        [1] => Some(SupportClass::Prime),
        [2] | [1, 1] => Some(SupportClass::TwoPrimes),
        [3] | [1, 2] => Some(SupportClass::PrimeTimesSquare),
        [4] | [2, 2] => Some(SupportClass::TwoSquares),
        _ => None,
    }
}
