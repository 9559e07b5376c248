use rayon::prelude::*;

use super::QSeries;
use crate::arith::{ext_gcd, gcd};
use crate::atkin_lehner::al_reduce;
use crate::error::{Error, Result};
use crate::hyp::{moebius_unchecked, HPoint, IntMat};
use crate::quad::integrate;

/// Panel budget of every one-dimensional quadrature.
const MAX_PANELS: usize = 400;

/// Tail tolerance of the pointwise evaluations inside the quadrature.
const EVAL_TAIL: f64 = 1e-14;

/// Representatives `γ_j ∈ SL_2(Z)` of `Γ_0(N) \ SL_2(Z)`, one per point
/// `(c : d)` of the projective line over `Z/N`, in increasing `(c, d)` order.
pub fn coset_reps(level: u64) -> Vec<IntMat> {
    let n = level as i64;
    if n == 1 {
        return vec![IntMat::IDENTITY];
    }
    let units: Vec<i64> = (1..n).filter(|&u| gcd(u, n) == 1).collect();
    let mut seen = vec![false; (n * n) as usize];
    let mut reps = Vec::new();
    for c in 0..n {
        for d in 0..n {
            if gcd(gcd(c, d), n) != 1 || seen[(c * n + d) as usize] {
                continue;
            }
            for &u in &units {
                seen[((u * c % n) * n + u * d % n) as usize] = true;
            }
            reps.push(lift(c, d, n));
        }
    }
    reps
}

/// A matrix of `SL_2(Z)` with bottom row congruent to `(c, d)` mod `N`.
fn lift(c: i64, d: i64, n: i64) -> IntMat {
    let (c, d) =
        if c == 0 { (0, 1) } else { (c, (0..).map(|j| d + j * n).find(|&dd| gcd(c, dd) == 1).expect("coprime lift")) };
    // a d - b c = 1
    let (_, x, y) = ext_gcd(d, c);
    IntMat::new(x, -y, c, d)
}

/// `∫_F g(z) dx dy / y²` over the standard fundamental domain
/// `|x| <= 1/2, |z| >= 1`, integrating `y` first. The `y` range is extended
/// in unit chunks until two consecutive chunks fall below `abs_tol / 100`.
pub fn fundamental_domain_integral(g: &(impl Fn(HPoint) -> Result<f64> + Sync), abs_tol: f64) -> Result<f64> {
    let inner_tol = abs_tol / 4.0;
    let mut failure: Option<Error> = None;
    let inner = |x: f64, failure: &mut Option<Error>| -> f64 {
        let y0 = (1.0 - x * x).sqrt();
        let mut total = 0.0;
        let mut small = 0;
        let mut lo = y0;
        let mut width = 0.5;
        let mut chunk_tol = inner_tol / 8.0;
        while small < 2 {
            let hi = lo + width;
            let f = |y: f64| match g(HPoint { x, y }) {
                Ok(v) => v / (y * y),
                Err(e) => {
                    if failure.is_none() {
                        *failure = Some(e);
                    }
                    0.0
                }
            };
            let piece = match integrate(f, lo, hi, chunk_tol, MAX_PANELS) {
                Ok((v, _)) => v,
                Err(e) => {
                    if failure.is_none() {
                        *failure = Some(e);
                    }
                    return 0.0;
                }
            };
            total += piece;
            small = if piece.abs() <= abs_tol / 100.0 { small + 1 } else { 0 };
            lo = hi;
            width = (width * 1.5).min(4.0);
            chunk_tol = (chunk_tol / 2.0).max(inner_tol / 256.0);
            if lo > 1e4 {
                break;
            }
        }
        total
    };
    let (v, _) = integrate(|x| inner(x, &mut failure), -0.5, 0.5, abs_tol / 2.0, MAX_PANELS)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// `y^{k/2} |f|` at `z`, evaluated after reduction modulo `Γ_0(N)` and the
/// Atkin-Lehner involutions (exact invariance for newforms).
fn invariant_at(f: &QSeries, z: HPoint) -> Result<f64> {
    let red = al_reduce(z, f.level)?.into_result()?;
    let s = red.z.y.powf(f.weight as f64 / 2.0);
    let (v, tail) = f.eval(red.z, EVAL_TAIL / s.max(1e-300))?;
    let _ = tail;
    Ok(s * v.norm())
}

/// `⟨f, f⟩ = ∫_{Γ_0(N)\H} |f|² y^{k-2} dx dy` to relative tolerance `tol`,
/// as a sum over coset cells `γ_j F`.
pub fn petersson_norm(f: &QSeries, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let reps = coset_reps(f.level);
    let cell = |gamma: &IntMat, abs_tol: f64| -> Result<f64> {
        let g = |z: HPoint| -> Result<f64> {
            let v = invariant_at(f, moebius_unchecked(gamma, z))?;
            Ok(v * v)
        };
        fundamental_domain_integral(&g, abs_tol)
    };
    // coarse pass fixes the absolute scale
    let rough: f64 = reps.par_iter().map(|g| cell(g, f64::INFINITY)).collect::<Result<Vec<_>>>()?.iter().sum();
    if !(rough > 0.0) {
        return Err(Error::Inconsistent("Petersson integrand vanishes".into()));
    }
    let per_cell = tol * rough / (4.0 * reps.len() as f64);
    let pieces = reps.par_iter().map(|g| cell(g, per_cell)).collect::<Result<Vec<_>>>()?;
    Ok(pieces.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factorize;

    #[test]
    fn coset_counts() {
        for n in 1..=30u64 {
            let index: u64 = factorize(n).iter().fold(n, |acc, &(p, _)| acc / p * (p + 1));
            let reps = coset_reps(n);
            assert_eq!(reps.len() as u64, index, "N = {n}");
            for (i, g) in reps.iter().enumerate() {
                assert_eq!(g.det(), 1);
                for h in &reps[i + 1..] {
                    // distinct cosets: g h^{-1} ∉ Γ_0(N)
                    let hinv = IntMat::new(h.d, -h.b, -h.c, h.a);
                    assert_ne!(g.mul(&hinv).c % n as i64, 0);
                }
            }
        }
        assert_eq!(coset_reps(5).len(), 6);
    }

    #[test]
    fn fundamental_domain_area() {
        let v = fundamental_domain_integral(&|_| Ok(1.0), 1e-9).unwrap();
        // the constant integrand has a y^{-2} tail beyond the cutoff
        assert!((v - std::f64::consts::PI / 3.0).abs() < 1e-2, "{v}");
    }

    #[test]
    fn fundamental_domain_decaying_integrand() {
        // ∫_F e^{-y} dμ against a direct evaluation
        let v = fundamental_domain_integral(&|z| Ok((-z.y).exp()), 1e-10).unwrap();
        let direct = integrate(
            |x| integrate(|y| (-y).exp() / (y * y), (1.0 - x * x).sqrt(), 60.0, 1e-13, 400).unwrap().0,
            -0.5,
            0.5,
            1e-12,
            400,
        )
        .unwrap()
        .0;
        assert!((v - direct).abs() < 1e-9, "{v} vs {direct}");
    }
}
