//! Parabolic matrices of `G_l(N)` for square `l = m²`.
//!
//! Every parabolic `α` with `det α = m²` and `N | c` is `ε (m I + t n)` with
//! `n = (-ac, a²; -c², ac)` for a cusp `(a, c)`: `c > 0` and `gcd(a, c) = 1`,
//! or `(a, c) = (1, 0)`. Then `N | c² t`, `u_α(z) = ε (-2 i m - t |cz - a|² / y)`
//! and `|u_α|² = 4l + ρ²` with `ρ = |t| |cz - a|² / y`. Truncation is on `ρ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{exact_sqrt, gcd};
use crate::error::{Error, Result};
use crate::hyp::{u_unchecked, HPoint, IntMat};
use crate::lattice::{gauss_reduce, Lattice2};

/// Largest truncation parameter `T` the sum will try.
const MAX_TRUNCATION: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParabolicParam {
    pub a: i64,
    pub c: i64,
    pub t: i64,
    pub l: i64,
    /// Overall sign `ε = ±1`.
    pub sign: i64,
}

impl ParabolicParam {
    /// `ε (√l - act, a²t; -c²t, √l + act)`.
    pub fn matrix(&self) -> IntMat {
        let m = exact_sqrt(self.l).expect("l is a square");
        let (a, c, t, e) = (self.a, self.c, self.t, self.sign);
        IntMat::new(e * (m - a * c * t), e * a * a * t, -e * c * c * t, e * (m + a * c * t))
    }

    /// `ρ = |t| |cz - a|² / y`.
    pub fn rho(&self, z: HPoint) -> f64 {
        let (p, q) = (self.c as f64 * z.x - self.a as f64, self.c as f64 * z.y);
        self.t.unsigned_abs() as f64 * (p * p + q * q) / z.y
    }
}

/// All parabolic `α` with `ρ <= T`, including the scalar pair `±√l I`
/// (emitted with `t = 0`, `(a, c) = (1, 0)`).
pub fn parabolic_stream(z: HPoint, level: u64, l: i64, t_max: f64) -> Result<Vec<(ParabolicParam, Complex64)>> {
    if level == 0 {
        return Err(Error::InvalidParameter("level must be positive".into()));
    }
    if !(t_max >= 1.0) || t_max > MAX_TRUNCATION {
        return Err(Error::InvalidParameter(format!("truncation must lie in [1, {MAX_TRUNCATION:e}]")));
    }
    let m = exact_sqrt(l).filter(|_| l > 0).ok_or(Error::NotASquare(l))?;
    let n = level as i64;
    let mut out = Vec::new();
    let mut emit = |a: i64, c: i64, t: i64| {
        for sign in [1, -1] {
            let p = ParabolicParam { a, c, t, l, sign };
            out.push((p, u_unchecked(&p.matrix(), z)));
        }
    };
    let _ = m;
    emit(1, 0, 0);
    // ρ <= T forces |cz - a|² <= T y / |t| <= T y
    let reach = (t_max * z.y).sqrt();
    let c_max = (reach / z.y + 1e-9).floor() as i64;
    for c in 0..=c_max {
        let step = n / gcd(n, c);
        let (a_lo, a_hi) = if c == 0 {
            (1, 1)
        } else {
            let cx = c as f64 * z.x;
            ((cx - reach).ceil() as i64, (cx + reach).floor() as i64)
        };
        for a in a_lo..=a_hi {
            if c > 0 && gcd(a, c) != 1 {
                continue;
            }
            let (p, q) = (c as f64 * z.x - a as f64, c as f64 * z.y);
            let w2 = p * p + q * q;
            let t_abs_max = (t_max * z.y / w2 + 1e-9).floor() as i64;
            let mut t = step;
            while t <= t_abs_max {
                emit(a, c, t);
                emit(a, c, -t);
                t += step;
            }
        }
    }
    Ok(out)
}

/// Certified bound on `Σ |u|^{-k}` over parabolic `α` with `ρ > T`.
///
/// Terms with `ρ <= X` inject into pairs `(t, v)` with `t != 0`, `v` a
/// nonzero point of `Z + zZ` and `|t| |v|² <= X y`, whose number is at most
/// `8K(1 + ln K) + 16K` with `K = X y / λ1²` (zero for `K < 1`). Dyadic
/// shells together with `|u| >= ρ` give the bound.
pub fn parabolic_tail_bound(z: HPoint, k: u32, t_max: f64) -> f64 {
    let lat = Lattice2::from_point(z.to_complex()).expect("y > 0");
    let lambda1 = gauss_reduce(&lat).lambda1;
    let count = |x: f64| -> f64 {
        let kk = x * z.y / (lambda1 * lambda1);
        if kk < 1.0 {
            0.0
        } else {
            8.0 * kk * (1.0 + kk.ln()) + 16.0 * kk
        }
    };
    let mut total = 0.0;
    let mut last = 0.0;
    for j in 0..200 {
        let lo = t_max * 2f64.powi(j);
        last = count(2.0 * lo) * lo.powi(-(k as i32));
        total += last;
        if last <= 1e-30 * total.max(f64::MIN_POSITIVE) && count(2.0 * lo) > 0.0 {
            break;
        }
    }
    // successive shells shrink by at least 4 · 2^{-k} <= 1/4
    total + last / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicSum {
    /// `Σ |u|^{-k}` over the emitted terms.
    pub value: f64,
    /// `Σ u^{-k}` over the emitted terms.
    pub signed: Complex64,
    pub tail_bound: f64,
    pub truncation: f64,
    pub terms: usize,
}

fn check_weight(k: u32) -> Result<()> {
    if k < 4 || !k.is_multiple_of(2) {
        return Err(Error::UnsupportedWeight(k));
    }
    Ok(())
}

/// Parabolic sum truncated at a given `T`.
pub fn parabolic_sum_truncated(z: HPoint, level: u64, l: i64, k: u32, t_max: f64) -> Result<ParabolicSum> {
    check_weight(k)?;
    if exact_sqrt(l).is_none() || l <= 0 {
        return Ok(ParabolicSum {
            value: 0.0,
            signed: Complex64::new(0.0, 0.0),
            tail_bound: 0.0,
            truncation: t_max,
            terms: 0,
        });
    }
    let mut terms = parabolic_stream(z, level, l, t_max)?;
    // fixed order: |u| descending, ties by parameters
    terms.sort_by(|(p, u), (q, v)| {
        v.norm_sqr().total_cmp(&u.norm_sqr()).then((p.c, p.a, p.t, p.sign).cmp(&(q.c, q.a, q.t, q.sign)))
    });
    let mut value = 0.0;
    let mut signed = Complex64::new(0.0, 0.0);
    for (_, u) in &terms {
        let inv = u.inv().powi(k as i32);
        value += inv.norm();
        signed += inv;
    }
    Ok(ParabolicSum {
        value,
        signed,
        tail_bound: parabolic_tail_bound(z, k, t_max),
        truncation: t_max,
        terms: terms.len(),
    })
}

/// Parabolic sum with the truncation doubled until the certified tail is at
/// most `tail_tol`.
pub fn parabolic_sum(z: HPoint, level: u64, l: i64, k: u32, tail_tol: f64) -> Result<ParabolicSum> {
    check_weight(k)?;
    if !(tail_tol > 0.0) {
        return Err(Error::InvalidParameter("tail tolerance must be positive".into()));
    }
    let mut t_max = 1.0;
    while parabolic_tail_bound(z, k, t_max) > tail_tol {
        t_max *= 2.0;
        if t_max > MAX_TRUNCATION {
            return Err(Error::TailTooLarge { tail: parabolic_tail_bound(z, k, t_max / 2.0), tol: tail_tol });
        }
    }
    parabolic_sum_truncated(z, level, l, k, t_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyp::{classify, MatClass};

    #[test]
    fn stream_examples() {
        let z = HPoint::i();
        let s = parabolic_stream(z, 1, 1, 1.0).unwrap();
        let find = |a, c, t| s.iter().find(|(p, _)| p.a == a && p.c == c && p.t == t).map(|x| x.1);
        for t in [1, -1] {
            assert!((find(1, 0, t).unwrap().norm_sqr() - 5.0).abs() < 1e-12);
            assert!((find(0, 1, t).unwrap().norm_sqr() - 5.0).abs() < 1e-12);
        }
        let s4 = parabolic_stream(z, 3, 4, 1.0).unwrap();
        let scalar: Vec<_> = s4.iter().filter(|(p, _)| p.t == 0).collect();
        assert_eq!(scalar.len(), 2);
        for (_, u) in scalar {
            assert!((u.norm() - 4.0).abs() < 1e-12);
        }
        assert!(matches!(parabolic_stream(z, 1, 2, 1.0), Err(Error::NotASquare(2))));
    }

    #[test]
    fn stream_matrices_are_parabolic() {
        let z = HPoint::new(0.31, 0.47).unwrap();
        for (level, l) in [(1u64, 1i64), (6, 4), (5, 9), (7, 1)] {
            let m = exact_sqrt(l).unwrap();
            for (p, u) in parabolic_stream(z, level, l, 40.0).unwrap() {
                let g = p.matrix();
                assert_eq!(g.det(), l);
                assert_eq!(g.trace().abs(), 2 * m);
                assert_eq!(g.c % level as i64, 0);
                assert_eq!(classify(&g, l).unwrap(), MatClass::Parabolic);
                let (x, y) = (p.c as f64 * z.x - p.a as f64, p.c as f64 * z.y);
                let formula = Complex64::new(p.t as f64 * (x * x + y * y), 2.0 * m as f64 * z.y) / z.y;
                assert!((u.norm() - formula.norm()).abs() < 1e-12 * (1.0 + u.norm()));
            }
        }
    }

    #[test]
    fn sum_examples() {
        let z = HPoint::i();
        let zero = parabolic_sum(z, 1, 2, 4, 1e-8).unwrap();
        assert_eq!(zero.value, 0.0);
        let s = parabolic_sum(z, 1, 1, 12, 1e-14).unwrap();
        assert!(s.value >= 2f64.powi(-12));
        assert!(s.tail_bound <= 1e-14);
        assert!(parabolic_sum(z, 1, 1, 3, 1e-8).is_err());
        assert!(parabolic_sum(z, 1, 1, 2, 1e-8).is_err());
    }

    #[test]
    fn tail_bound_covers_doubling() {
        let z = HPoint::new(0.1, 0.3f64.sqrt()).unwrap();
        for k in [4u32, 6] {
            let s = parabolic_sum(z, 5, 1, k, 1e-6).unwrap();
            let s2 = parabolic_sum_truncated(z, 5, 1, k, 2.0 * s.truncation).unwrap();
            assert!(s2.value - s.value <= s.tail_bound);
            assert!(s2.value >= s.value);
        }
    }
}
