use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{tau, QSeries};
use crate::arith::{gcd, primes_below};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeckeReport {
    pub multiplicative_ok: bool,
    pub recursion_ok: bool,
    pub bad_prime_ok: bool,
    pub first_failure: Option<usize>,
}

impl HeckeReport {
    pub fn passed(&self) -> bool {
        self.multiplicative_ok && self.recursion_ok && self.bad_prime_ok
    }
}

fn big(x: i128) -> BigInt {
    BigInt::from(x)
}

fn note(first: &mut Option<usize>, n: usize) {
    *first = Some(first.map_or(n, |f| f.min(n)));
}

/// Check the Hecke relations of a newform of square-free level on `a(1..=M)`:
/// multiplicativity on coprime pairs, the recursion at `p ∤ N` and
/// `a(p)² = p^{k-2}`, `a(p^j) = a(p)^j` at `p | N`. Relations are scaled by
/// powers of `a(1)` so unnormalized series are judged consistently.
pub fn hecke_check(f: &QSeries) -> HeckeReport {
    let m = f.len();
    let a = |n: usize| big(f.coeffs[n]);
    let a1 = a(1);
    let mut report =
        HeckeReport { multiplicative_ok: true, recursion_ok: true, bad_prime_ok: true, first_failure: None };
    if a1 == BigInt::from(0) {
        report.multiplicative_ok = false;
        report.first_failure = Some(1);
        return report;
    }
    for x in 2..=m {
        for y in (x + 1)..=(m / x) {
            if gcd(x as i64, y as i64) == 1 && &a1 * a(x * y) != a(x) * a(y) {
                report.multiplicative_ok = false;
                note(&mut report.first_failure, x * y);
            }
        }
    }
    let k = f.weight;
    for p in primes_below(m as u64 + 1) {
        let pu = p as usize;
        if !f.level.is_multiple_of(p) {
            let pk = BigInt::from(p).pow(k.saturating_sub(1));
            let (mut prev, mut cur) = (1usize, pu);
            while cur.checked_mul(pu).is_some_and(|next| next <= m) {
                let next = cur * pu;
                if &a1 * a(next) != a(pu) * a(cur) - &pk * &a1 * a(prev) {
                    report.recursion_ok = false;
                    note(&mut report.first_failure, next);
                }
                (prev, cur) = (cur, next);
            }
        } else {
            let pk = BigInt::from(p).pow(k.saturating_sub(2));
            if a(pu) * a(pu) != pk * &a1 * &a1 {
                report.bad_prime_ok = false;
                note(&mut report.first_failure, pu);
            }
            let mut cur = pu;
            let mut j = 1u32;
            while cur.checked_mul(pu).is_some_and(|next| next <= m) {
                cur *= pu;
                j += 1;
                if a(cur) * a1.pow(j - 1) != a(pu).pow(j) {
                    report.bad_prime_ok = false;
                    note(&mut report.first_failure, cur);
                }
            }
        }
    }
    report
}

/// First `n` with `a(n)² > τ(n)² n^{k-1} a(1)²`, checked exactly.
pub fn deligne_violation(f: &QSeries) -> Option<usize> {
    let a1 = big(f.coeffs[1]);
    (1..=f.len()).find(|&n| {
        let an = big(f.coeffs[n]);
        let t = BigInt::from(tau(n));
        &an * &an > &t * &t * BigInt::from(n).pow(f.weight.saturating_sub(1)) * &a1 * &a1
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::{eta_expand, EtaQuotient};

    fn form(s: &str, m: usize) -> QSeries {
        eta_expand(&EtaQuotient::parse(s).unwrap(), m).unwrap()
    }

    #[test]
    fn catalog_quotients_pass() {
        for s in ["1:24", "1:4,5:4", "1:2,2:2,3:2,6:2", "1:2,11:2"] {
            let f = form(s, 300);
            let r = hecke_check(&f);
            assert!(r.passed(), "{s}: {r:?}");
            assert_eq!(r.first_failure, None);
            assert_eq!(deligne_violation(&f), None, "{s}");
        }
        let f = form("1:4,5:4", 10);
        assert_eq!(f.a(5).unwrap().pow(2), 25);
    }

    #[test]
    fn corrupted_series_is_caught() {
        let f = form("1:24", 50);
        let mut c = f.coeffs().to_vec();
        c[5] += 1;
        let bad = QSeries::new(1, 12, &c).unwrap();
        let r = hecke_check(&bad);
        assert!(!r.multiplicative_ok);
        assert_eq!(r.first_failure, Some(6));
    }

    #[test]
    fn hecke_relation_for_eigenvalues() {
        let f = form("1:24", 200);
        let l2 = f.lam(2).unwrap();
        assert!((l2 - (-24.0 / 2f64.powf(5.5))).abs() < 1e-15);
        assert!((l2 * l2 - f.lam(4).unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(f.lam(1).unwrap(), 1.0);
        for s in ["1:4,5:4", "1:2,2:2,3:2,6:2"] {
            let g = form(s, 200);
            for p in [2usize, 3, 5, 7, 11, 13] {
                if !g.level.is_multiple_of(p as u64) {
                    assert!((g.lam(p).unwrap().powi(2) - g.lam(p * p).unwrap() - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn deligne_catches_large_coefficients() {
        let f = QSeries::new(1, 12, &[1, 1000]).unwrap();
        assert_eq!(deligne_violation(&f), Some(2));
    }
}
