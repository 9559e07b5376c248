//! Exact censuses of `G_l(N) = {γ integral : N | c, det γ = l}` restricted to
//! `|u_γ(z)| <= δ`, their generic / upper-triangular / parabolic split, exact
//! parabolic sums and the closed-form counting bounds they are compared to.

mod bounds;
mod conformance;
mod parabolic;

pub use bounds::{bound_mstar, bound_mu, bound_para, MStarMode, MuMode, DEFAULT_EPS};
pub use conformance::{census_by_det, conformance_row, Comparison, ConformanceRow, FIXED_L1, PARA_DETS, PARA_WEIGHTS};
pub use parabolic::{
    parabolic_stream, parabolic_sum, parabolic_sum_truncated, parabolic_tail_bound, ParabolicParam, ParabolicSum,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{ext_gcd, gcd};
use crate::error::{Error, Result};
use crate::hyp::{classify, sort_canonical, u_unchecked, within_delta, HPoint, IntMat, MatClass};

/// Largest `δ` accepted by the enumerator.
pub const MAX_DELTA: f64 = 1e6;

/// Largest coefficient box accepted by the brute-force oracle.
pub const MAX_ORACLE_BOX: i64 = 60;

/// Interval slack for the enumeration ranges; the final `|u| <= δ` filter
/// decides membership.
const RANGE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumWindow {
    pub z: HPoint,
    pub level: i64,
    pub l: i64,
    pub delta: f64,
}

impl EnumWindow {
    pub fn new(z: HPoint, level: i64, l: i64, delta: f64) -> Result<Self> {
        let w = Self { z, level, l, delta };
        w.validate()?;
        Ok(w)
    }

    fn validate(&self) -> Result<()> {
        if self.level <= 0 {
            return Err(Error::InvalidParameter(format!("level must be positive, got {}", self.level)));
        }
        if self.l <= 0 {
            return Err(Error::InvalidParameter(format!("l must be positive, got {}", self.l)));
        }
        if !(self.delta >= 0.0) || self.delta > MAX_DELTA {
            return Err(Error::InvalidParameter(format!("delta must lie in [0, {MAX_DELTA}], got {}", self.delta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSplit {
    pub m_star: u64,
    pub m_upper: u64,
    pub m_parab: u64,
}

impl CountSplit {
    pub fn total(&self) -> u64 {
        self.m_star + self.m_upper + self.m_parab
    }

    pub fn add(&mut self, class: MatClass) {
        match class {
            MatClass::Generic => self.m_star += 1,
            MatClass::UpperTriangular => self.m_upper += 1,
            MatClass::Parabolic => self.m_parab += 1,
        }
    }

    pub fn get(&self, class: MatClass) -> u64 {
        match class {
            MatClass::Generic => self.m_star,
            MatClass::UpperTriangular => self.m_upper,
            MatClass::Parabolic => self.m_parab,
        }
    }
}

/// All matrices of `G_l(N)` with `|u_γ(z)| <= δ`, in canonical order.
pub fn enumerate_window(w: &EnumWindow) -> Result<Vec<IntMat>> {
    w.validate()?;
    Ok(enumerate_dets(w.z, w.level, w.l, w.l, w.delta))
}

/// Matrices with `N | c`, `l_lo <= det <= l_hi` and `|u_γ(z)| <= δ`, in
/// canonical order.
///
/// For `c != 0` write `w = cz + d`; then `c y u = |w|^2 + l - (a + d) w` up to
/// sign, so `|a + d| <= δ`, `|w| <= 2δ` (hence `|c| y <= 2δ`) and
/// `|w|^2 + l - (a + d)(cx + d)` lies within `δ |c| y` of zero. Integrality
/// of `b = (ad - l)/c` turns the remaining free parameter into an arithmetic
/// progression. For `c = 0` the factorizations `ad = l` and the window
/// `|(d - a) x - b| <= δ y` are enumerated directly.
pub fn enumerate_dets(z: HPoint, level: i64, l_lo: i64, l_hi: i64, delta: f64) -> Vec<IntMat> {
    let l_lo = l_lo.max(1);
    // nothing below 2√l
    if l_hi < l_lo || delta + RANGE_EPS < 2.0 * (l_lo as f64).sqrt() {
        return Vec::new();
    }
    let mut out = upper_triangular_part(z, l_lo, l_hi, delta);
    let c_max = ((2.0 * delta + RANGE_EPS) / z.y).floor() as i64;
    let j_max = c_max / level;
    let cs: Vec<i64> = (1..=j_max).flat_map(|j| [-j * level, j * level]).collect();
    let parts: Vec<Vec<IntMat>> = cs.par_iter().map(|&c| lower_part_for_c(z, c, l_lo, l_hi, delta)).collect();
    for p in parts {
        out.extend(p);
    }
    sort_canonical(&mut out);
    out
}

fn upper_triangular_part(z: HPoint, l_lo: i64, l_hi: i64, delta: f64) -> Vec<IntMat> {
    let mut out = Vec::new();
    let a_max = (delta + RANGE_EPS).floor() as i64;
    let bw = delta * z.y + RANGE_EPS;
    for a in -a_max..=a_max {
        if a == 0 {
            continue;
        }
        let sgn = a.signum();
        // d has the sign of a and |a + d| <= δ
        let d_abs_max = a_max - a.abs();
        for d_abs in 1..=d_abs_max {
            let d = sgn * d_abs;
            let l = a * d;
            if l < l_lo || l > l_hi {
                continue;
            }
            let centre = (d - a) as f64 * z.x;
            let b_lo = (centre - bw).ceil() as i64;
            let b_hi = (centre + bw).floor() as i64;
            for b in b_lo..=b_hi {
                let m = IntMat::new(a, b, 0, d);
                if within_delta(u_unchecked(&m, z), delta) {
                    out.push(m);
                }
            }
        }
    }
    out
}

/// Solutions `t` of `k t ≡ r (mod m)` as `(t0, step)`, or `None`.
fn solve_congruence(k: i64, r: i64, m: i64) -> Option<(i64, i64)> {
    let m = m.abs();
    let g = gcd(k, m);
    if r.rem_euclid(g) != 0 {
        return None;
    }
    let step = m / g;
    if step == 1 {
        return Some((0, 1));
    }
    let (_, inv, _) = ext_gcd((k / g).rem_euclid(step), step);
    let t0 = ((r / g).rem_euclid(step) as i128 * inv.rem_euclid(step) as i128).rem_euclid(step as i128) as i64;
    Some((t0, step))
}

/// First element `>= lo` of the progression `t0 + step * Z`.
fn first_at_least(lo: i64, t0: i64, step: i64) -> i64 {
    lo + (t0 - lo).rem_euclid(step)
}

fn lower_part_for_c(z: HPoint, c: i64, l_lo: i64, l_hi: i64, delta: f64) -> Vec<IntMat> {
    let mut out = Vec::new();
    let cf = c as f64;
    let cy = cf.abs() * z.y;
    let w_max = 2.0 * delta + RANGE_EPS;
    let d_lo = (-cf * z.x - w_max).ceil() as i64;
    let d_hi = (-cf * z.x + w_max).floor() as i64;
    let tau_max = (delta + RANGE_EPS).floor() as i64;
    let slack = delta * cy + RANGE_EPS * (1.0 + delta * cy);
    let few_l = l_hi - l_lo <= 8;
    for d in d_lo..=d_hi {
        let p = cf * z.x + d as f64;
        let w2 = p * p + cy * cy;
        if w2 > w_max * w_max || w2 + l_lo as f64 > 2.0 * delta * w2.sqrt() + RANGE_EPS {
            continue;
        }
        let mut push = |tau: i64, l: i64| {
            let a = tau - d;
            let num = a * d - l;
            if num % c != 0 {
                return;
            }
            let m = IntMat::new(a, num / c, c, d);
            debug_assert_eq!(m.det(), l);
            if within_delta(u_unchecked(&m, z), delta) {
                out.push(m);
            }
        };
        if few_l {
            for l in l_lo..=l_hi {
                // τ p ∈ [w2 + l - slack, w2 + l + slack]
                let (lo, hi) = tau_interval(p, w2 + l as f64, slack, tau_max);
                if lo > hi {
                    continue;
                }
                // (τ - d) d ≡ l (mod c)  <=>  d τ ≡ l + d² (mod c)
                let Some((t0, step)) = solve_congruence(d, l + d * d, c) else {
                    continue;
                };
                let mut tau = first_at_least(lo, t0, step);
                while tau <= hi {
                    push(tau, l);
                    tau += step;
                }
            }
        } else {
            let (lo, hi) = tau_interval_range(p, w2, l_lo as f64, l_hi as f64, slack, tau_max);
            for tau in lo..=hi {
                let centre = tau as f64 * p - w2;
                let ll = ((centre - slack).ceil() as i64).max(l_lo);
                let lh = ((centre + slack).floor() as i64).min(l_hi);
                if ll > lh {
                    continue;
                }
                // l ≡ (τ - d) d (mod c)
                let r = ((tau - d) * d).rem_euclid(c.abs());
                let mut l = first_at_least(ll, r, c.abs());
                while l <= lh {
                    push(tau, l);
                    l += c.abs();
                }
            }
        }
    }
    out
}

/// Integer `τ` in `[-τmax, τmax]` with `|τ p - target| <= slack`.
fn tau_interval(p: f64, target: f64, slack: f64, tau_max: i64) -> (i64, i64) {
    if p.abs() < 1e-12 {
        return if target.abs() <= slack { (-tau_max, tau_max) } else { (1, 0) };
    }
    let (x0, x1) = ((target - slack) / p, (target + slack) / p);
    let (lo, hi) = if x0 <= x1 { (x0, x1) } else { (x1, x0) };
    let lo = (lo - RANGE_EPS).ceil().max(-(tau_max as f64)) as i64;
    let hi = (hi + RANGE_EPS).floor().min(tau_max as f64) as i64;
    (lo, hi)
}

fn tau_interval_range(p: f64, w2: f64, l_lo: f64, l_hi: f64, slack: f64, tau_max: i64) -> (i64, i64) {
    let (t_lo, t_hi) = (w2 + l_lo - slack, w2 + l_hi + slack);
    if p.abs() < 1e-12 {
        return if t_lo <= 0.0 && 0.0 <= t_hi { (-tau_max, tau_max) } else { (1, 0) };
    }
    let (x0, x1) = (t_lo / p, t_hi / p);
    let (lo, hi) = if x0 <= x1 { (x0, x1) } else { (x1, x0) };
    let lo = (lo - RANGE_EPS).ceil().max(-(tau_max as f64)) as i64;
    let hi = (hi + RANGE_EPS).floor().min(tau_max as f64) as i64;
    (lo, hi)
}

/// Classify the window census.
pub fn count_split(w: &EnumWindow) -> Result<CountSplit> {
    let mut split = CountSplit::default();
    for m in enumerate_window(w)? {
        split.add(classify(&m, w.l)?);
    }
    Ok(split)
}

/// Split of `Σ_l M(z, l, δ)` over all `1 <= l <= l_max` accepted by `keep`.
pub fn census_sum(z: HPoint, level: i64, delta: f64, l_max: i64, keep: impl Fn(i64) -> bool) -> CountSplit {
    let mut split = CountSplit::default();
    for m in enumerate_dets(z, level, 1, l_max, delta) {
        let l = m.det();
        if keep(l) {
            split.add(classify(&m, l).expect("det matches"));
        }
    }
    split
}

/// All `γ` with `|a|, |b|, |c|, |d| <= box_size`, `N | c`, `det γ = l` and
/// `|u_γ(z)| <= δ`, by exhausting the box; `b` is solved from the
/// determinant when `c != 0`.
pub fn brute_oracle(z: HPoint, level: i64, l: i64, delta: f64, box_size: i64) -> Result<Vec<IntMat>> {
    if !(0..=MAX_ORACLE_BOX).contains(&box_size) {
        return Err(Error::InvalidParameter(format!("oracle box must lie in [0, {MAX_ORACLE_BOX}]")));
    }
    if level <= 0 {
        return Err(Error::InvalidParameter("level must be positive".into()));
    }
    let mut out = Vec::new();
    let mut keep = |m: IntMat| {
        if m.det() == l && within_delta(u_unchecked(&m, z), delta) {
            out.push(m);
        }
    };
    for c in -box_size..=box_size {
        if c % level != 0 {
            continue;
        }
        for d in -box_size..=box_size {
            for a in -box_size..=box_size {
                if c == 0 {
                    for b in -box_size..=box_size {
                        keep(IntMat::new(a, b, 0, d));
                    }
                } else if (a * d - l) % c == 0 {
                    let b = (a * d - l) / c;
                    if b.abs() <= box_size {
                        keep(IntMat::new(a, b, c, d));
                    }
                }
            }
        }
    }
    sort_canonical(&mut out);
    Ok(out)
}

/// Smallest box guaranteed to contain every matrix of the window: `|c| y <= 2δ`,
/// `|cz + d| <= 2δ`, `|a + d| <= δ` and `|b| <= δ y + |c| |z|² + |d - a| |x|`.
pub fn covering_box(z: HPoint, delta: f64) -> i64 {
    let c = (2.0 * delta / z.y).floor();
    let d = (c * z.x.abs() + 2.0 * delta).floor();
    let a = (delta + d).floor();
    let b = (delta * z.y + c * z.norm_sqr() + (a + d) * z.x.abs()).floor();
    c.max(d).max(a).max(b) as i64 + 1
}
