use serde::{Deserialize, Serialize};

use super::QSeries;
use crate::arith::lcm;
use crate::error::{Error, Result};

/// Largest truncation accepted by `eta_expand`.
pub const MAX_TRUNCATION: usize = 100_000;

/// `Π η(d z)^{e_d}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaQuotient {
    pub factors: Vec<(u64, i64)>,
}

impl EtaQuotient {
    pub fn new(factors: &[(u64, i64)]) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|&(d, _)| d == 0) {
            return Err(Error::InvalidParameter("eta factors need positive d".into()));
        }
        Ok(Self { factors: factors.to_vec() })
    }

    /// Parse `"d:e,d:e,..."`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse eta quotient {s:?}; expected d:e[,d:e...]"));
        let factors = s
            .split(',')
            .map(|part| {
                let (d, e) = part.trim().split_once(':').ok_or_else(bad)?;
                Ok((d.trim().parse().map_err(|_| bad())?, e.trim().parse().map_err(|_| bad())?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&factors)
    }

    /// `lcm` of the `d`.
    pub fn level(&self) -> u64 {
        self.factors.iter().fold(1, |acc, &(d, _)| lcm(acc, d))
    }

    /// `Σ e / 2`, or `None` when odd or negative.
    pub fn weight(&self) -> Option<u32> {
        let s: i64 = self.factors.iter().map(|&(_, e)| e).sum();
        (s >= 0 && s % 2 == 0).then_some((s / 2) as u32)
    }

    /// Exponent of the leading `q` power.
    pub fn order_at_infinity(&self) -> Result<i64> {
        let s: i64 = self.factors.iter().map(|&(d, e)| d as i64 * e).sum();
        if s % 24 != 0 {
            return Err(Error::EtaNotIntegral(s));
        }
        Ok(s / 24)
    }
}

/// `Π_{n >= 1} (1 - q^n)^e` to degree `m`, by the logarithmic-derivative
/// recurrence on the pentagonal series; every division is exact.
fn euler_power(e: i64, m: usize) -> Result<Vec<i128>> {
    let mut p = vec![0i128; m + 1];
    p[0] = 1;
    let mut j = 1i64;
    loop {
        let sign = if j % 2 == 1 { -1 } else { 1 };
        let g1 = (j * (3 * j - 1) / 2) as usize;
        let g2 = (j * (3 * j + 1) / 2) as usize;
        if g1 > m {
            break;
        }
        p[g1] += sign;
        if g2 <= m {
            p[g2] += sign;
        }
        j += 1;
    }
    let mut g = vec![0i128; m + 1];
    g[0] = 1;
    let e = e as i128;
    for n in 1..=m {
        let mut acc: i128 = 0;
        for jj in 1..=n {
            if p[jj] == 0 || g[n - jj] == 0 {
                continue;
            }
            let w = (e + 1) * jj as i128 - n as i128;
            let t = w.checked_mul(p[jj]).and_then(|x| x.checked_mul(g[n - jj])).ok_or(Error::Overflow(n))?;
            acc = acc.checked_add(t).ok_or(Error::Overflow(n))?;
        }
        if acc % n as i128 != 0 {
            return Err(Error::Inconsistent(format!("inexact division in eta recurrence at {n}")));
        }
        g[n] = acc / n as i128;
    }
    Ok(g)
}

fn mul_trunc(a: &[i128], b: &[i128], m: usize) -> Result<Vec<i128>> {
    let mut c = vec![0i128; m + 1];
    for (i, &x) in a.iter().enumerate().take(m + 1) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(m + 1 - i) {
            if y == 0 {
                continue;
            }
            let t = x.checked_mul(y).ok_or(Error::Overflow(i + j))?;
            c[i + j] = c[i + j].checked_add(t).ok_or(Error::Overflow(i + j))?;
        }
    }
    Ok(c)
}

/// Exact coefficients `a(1..=m)` of the eta quotient.
pub fn eta_expand(q: &EtaQuotient, m: usize) -> Result<QSeries> {
    if m == 0 || m > MAX_TRUNCATION {
        return Err(Error::InvalidParameter(format!("truncation must lie in [1, {MAX_TRUNCATION}]")));
    }
    let weight = q.weight().ok_or_else(|| Error::InvalidParameter("Σ e must be even and non-negative".into()))?;
    let s = q.order_at_infinity()?;
    if s < 1 {
        return Err(Error::EtaNotCuspidal(s));
    }
    let s = s as usize;
    let mut coeffs = vec![0i128; m];
    if s <= m {
        // coefficient of q^n in the product is the degree n - s term
        let deg = m - s;
        let mut prod = vec![0i128; deg + 1];
        prod[0] = 1;
        for &(d, e) in &q.factors {
            let d = d as usize;
            let inner = euler_power(e, deg / d)?;
            let mut spread = vec![0i128; deg + 1];
            for (i, &c) in inner.iter().enumerate() {
                spread[i * d] = c;
            }
            prod = mul_trunc(&prod, &spread, deg)?;
        }
        coeffs[s - 1..].copy_from_slice(&prod);
    }
    QSeries::new(q.level(), weight, &coeffs)
}
