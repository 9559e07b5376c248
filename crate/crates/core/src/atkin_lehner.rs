//! Atkin-Lehner operators for square-free level and reduction of points to
//! the domain `A_0(N)\H`, where every point has maximal imaginary part in its
//! orbit under the group generated by `Γ_0(N)` and the Atkin-Lehner
//! involutions.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, ext_gcd, gcd, is_squarefree};
use crate::error::{Error, Result};
use crate::hyp::{moebius_unchecked, HPoint, IntMat};
use crate::lattice::{gauss_reduce, Lattice2};

/// Upper limit on the number of moves `al_reduce` may apply.
pub const MOVE_BUDGET: usize = 10_000;

/// Relative improvement below which a move is not taken.
const IMPROVE_EPS: f64 = 1e-15;

/// Slack for the gap conclusions.
pub const GAP_EPS: f64 = 1e-12;

/// `σ = (√r a, b/√r; √r s, √r d)` with `r | N`, `N | r s`, `r a d - s b = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ALOperator {
    pub level: u64,
    pub r: u64,
    pub a: i64,
    pub b: i64,
    pub s: i64,
    pub d: i64,
}

impl ALOperator {
    /// The integral representative `(r a, b; r s, r d)` of determinant `r`;
    /// it acts on the upper half-plane exactly as the scaled operator.
    pub fn integral(&self) -> IntMat {
        let r = self.r as i64;
        IntMat::new(r * self.a, self.b, r * self.s, r * self.d)
    }

    /// Entries of the determinant-one matrix, row-major.
    pub fn scaled(&self) -> [f64; 4] {
        let sr = (self.r as f64).sqrt();
        [sr * self.a as f64, self.b as f64 / sr, sr * self.s as f64, sr * self.d as f64]
    }

    pub fn act(&self, z: HPoint) -> HPoint {
        moebius_unchecked(&self.integral(), z)
    }

    fn validate(&self) -> bool {
        let (n, r) = (self.level as i64, self.r as i64);
        n % r == 0 && (r * self.s) % n == 0 && gcd(self.a, self.s) == 1 && r * self.a * self.d - self.s * self.b == 1
    }
}

/// Build the Atkin-Lehner operator for `r | N`.
///
/// Solutions of `r a d - s b = 1` are searched with `|b|` increasing
/// (negative first), then `|a|` increasing (positive first), then the
/// multiple `s` of `N/r` of least absolute value (positive first).
pub fn al_build(level: u64, r: u64) -> Result<ALOperator> {
    if !is_squarefree(level) {
        return Err(Error::NotSquareFree(level));
    }
    if r == 0 || !level.is_multiple_of(r) {
        return Err(Error::NotADivisor { r, n: level });
    }
    let (ri, m) = (r as i64, (level / r) as i64);
    let signed = |k: i64| -> [i64; 2] { [-k, k] };
    // gcd(r, N/r) = 1 guarantees a solution with |b| <= 1, a = 1
    for bb in 0..=2i64 {
        for b in signed(bb) {
            if bb == 0 && b != 0 {
                continue;
            }
            for aa in 0..=(ri * m + 1) {
                for a in [aa, -aa] {
                    if aa == 0 && a != 0 {
                        continue;
                    }
                    if let Some(op) = solve_sd(level, ri, m, a, b) {
                        return Ok(op);
                    }
                }
            }
        }
    }
    Err(Error::Inconsistent(format!("no Atkin-Lehner operator for N={level}, r={r}")))
}

fn solve_sd(level: u64, r: i64, m: i64, a: i64, b: i64) -> Option<ALOperator> {
    let mk = |s: i64, d: i64| ALOperator { level, r: r as u64, a, b, s, d };
    if a == 0 {
        // -s b = 1
        if b == 0 {
            return None;
        }
        let s = -b;
        if s.abs() != 1 || s % m != 0 {
            return None;
        }
        let op = mk(s, 0);
        return op.validate().then_some(op);
    }
    // r a d = 1 + s b with s = m j; j runs over one period of the residue
    let period = (r * a).abs();
    let mut js: Vec<i64> = (0..=period).flat_map(|j| [j, -j]).collect();
    js.dedup();
    for j in js {
        let s = m * j;
        let num = 1 + s * b;
        if num % (r * a) != 0 {
            continue;
        }
        let op = mk(s, num / (r * a));
        if op.validate() {
            return Some(op);
        }
    }
    None
}

/// One step of a reduction word.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Move {
    Translate(i64),
    Gamma0(IntMat),
    AtkinLehner(ALOperator),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedPoint {
    pub z: HPoint,
    pub word: Vec<Move>,
    /// False when the move budget ran out; `z` is then the best point found.
    pub converged: bool,
}

impl ReducedPoint {
    pub fn into_result(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::MoveBudgetExceeded { budget: MOVE_BUDGET })
        }
    }
}

/// Smallest `r |s z + d|^2` over admissible bottom rows with `s != 0`.
fn best_row(z: HPoint, level: u64, divs: &[u64]) -> Option<(f64, u64, i64, i64)> {
    let mut best: Option<(f64, u64, i64, i64)> = None;
    let mut best_q = 1.0 - IMPROVE_EPS;
    for &r in divs {
        let m = (level / r) as i64;
        let rf = r as f64;
        let mut j = 1i64;
        loop {
            let s = m * j;
            let sy = s as f64 * z.y;
            let room = best_q / rf - sy * sy;
            if room <= 0.0 {
                break;
            }
            let w = room.sqrt();
            let centre = -(s as f64) * z.x;
            let d_lo = (centre - w).floor() as i64;
            let d_hi = (centre + w).ceil() as i64;
            for d in d_lo..=d_hi {
                if gcd(s, r as i64 * d) != 1 {
                    continue;
                }
                let re = s as f64 * z.x + d as f64;
                let q = rf * (re * re + sy * sy);
                if q < best_q {
                    best_q = q;
                    best = Some((q, r, s, d));
                }
            }
            j += 1;
        }
    }
    best
}

/// Reduce `z` into the `A_0(N)` domain by greedy maximization of `Im z`.
///
/// Each round translates `x` into `[-1/2, 1/2)` and then applies the
/// element (from `Γ_0(N)` when `r = 1`, an Atkin-Lehner operator otherwise)
/// whose bottom row `(√r s, √r d)` minimizes `r |s z + d|^2`, as long as that
/// minimum is below one. At termination every element of the group has
/// `Im(g z) <= Im z`, which gives both gap properties.
pub fn al_reduce(z: HPoint, level: u64) -> Result<ReducedPoint> {
    if !is_squarefree(level) {
        return Err(Error::NotSquareFree(level));
    }
    let divs = divisors(level);
    let mut z = z;
    let mut word = Vec::new();
    let mut moves = 0usize;
    loop {
        let t = -(z.x + 0.5).floor();
        if t != 0.0 {
            z = z.translate(t);
            word.push(Move::Translate(t as i64));
            moves += 1;
        }
        if moves >= MOVE_BUDGET {
            return Ok(ReducedPoint { z, word, converged: false });
        }
        let Some((_, r, s, d)) = best_row(z, level, &divs) else {
            return Ok(ReducedPoint { z, word, converged: true });
        };
        let ri = r as i64;
        let (g, u, v) = ext_gcd(ri * d, s);
        debug_assert_eq!(g, 1);
        let (a, b) = (u, -v);
        let op = ALOperator { level, r, a, b, s, d };
        debug_assert!(op.validate());
        z = op.act(z);
        if r == 1 {
            word.push(Move::Gamma0(IntMat::new(a, b, s, d)));
        } else {
            word.push(Move::AtkinLehner(op));
        }
        moves += 1;
    }
}

/// Outcome of the gap check for a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub im_ok: bool,
    /// `min |c z + d|^2` over `(c, d) != (0, 0)`.
    pub min_norm: f64,
    pub norm_ok: bool,
}

pub fn check_gap(z: HPoint, level: u64) -> GapReport {
    let n = level as f64;
    let im_ok = z.y >= 3f64.sqrt() / (2.0 * n) - GAP_EPS;
    let lat = Lattice2::from_point(z.to_complex()).expect("Im z > 0 spans a lattice");
    let red = gauss_reduce(&lat);
    let min_norm = red.b1.norm_sqr();
    GapReport { im_ok, min_norm, norm_ok: min_norm >= 1.0 / n - GAP_EPS }
}

/// The point `1/q + i √3 / (2 q^2)`, given exactly as `(x, y^2)`.
pub fn square_level_point(q: i64) -> (Ratio<i64>, Ratio<i64>) {
    (Ratio::new(1, q), Ratio::new(3, 4 * q.pow(4)))
}

/// Exact `min |c z + d|^2` for `z = x + i y` with rational `x` and `y^2`.
///
/// Since `|1|^2 = 1`, the minimum is at most one, so `c^2 y^2 <= 1` and
/// `|c x + d| <= 1` bound the search.
pub fn exact_min_norm(x: Ratio<i64>, y_sq: Ratio<i64>) -> Ratio<i64> {
    let one = Ratio::from_integer(1);
    let mut best = one;
    let c_max = {
        let mut c = 0i64;
        while Ratio::from_integer((c + 1) * (c + 1)) * y_sq <= one {
            c += 1;
        }
        c
    };
    for c in -c_max..=c_max {
        let cx = x * c;
        let lo = (-cx - one).floor().to_integer();
        let hi = (-cx + one).ceil().to_integer();
        for d in lo..=hi {
            if c == 0 && d == 0 {
                continue;
            }
            let re = cx + d;
            let v = re * re + y_sq * (c * c);
            if v < best {
                best = v;
            }
        }
    }
    best
}
