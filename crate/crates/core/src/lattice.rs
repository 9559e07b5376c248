//! Rank-2 Euclidean lattices in the complex plane: Lagrange-Gauss reduction,
//! successive minima and exact disc counts.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hyp::GEOM_EPS;

/// Implied constant used when checking `#(L ∩ D) <= C (1 + R/λ1 + R²/(λ1 λ2))`.
pub const C_DISC: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice2 {
    pub v1: Complex64,
    pub v2: Complex64,
    pub covolume: f64,
}

impl Lattice2 {
    pub fn new(v1: Complex64, v2: Complex64) -> Result<Self> {
        let covolume = (v1.conj() * v2).im.abs();
        let scale = v1.norm() * v2.norm();
        if !(covolume > 1e-14 * scale) || !covolume.is_finite() {
            return Err(Error::DegenerateLattice);
        }
        Ok(Self { v1, v2, covolume })
    }

    /// The lattice `Z + Z z` spanned by `1` and `z`.
    pub fn from_point(z: Complex64) -> Result<Self> {
        Self::new(Complex64::new(1.0, 0.0), z)
    }

    pub fn point(&self, m: i64, n: i64) -> Complex64 {
        self.v1 * m as f64 + self.v2 * n as f64
    }
}

/// A Lagrange-Gauss reduced basis together with the successive minima.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reduced {
    pub lambda1: f64,
    pub lambda2: f64,
    pub b1: Complex64,
    pub b2: Complex64,
    /// Integer coordinates of `b1` and `b2` in the input basis.
    pub coeffs: [[i64; 2]; 2],
}

fn dot(u: Complex64, v: Complex64) -> f64 {
    u.re * v.re + u.im * v.im
}

pub fn gauss_reduce(lat: &Lattice2) -> Reduced {
    let (mut b1, mut b2) = (lat.v1, lat.v2);
    let (mut c1, mut c2) = ([1i64, 0], [0i64, 1]);
    if b1.norm_sqr() > b2.norm_sqr() {
        std::mem::swap(&mut b1, &mut b2);
        std::mem::swap(&mut c1, &mut c2);
    }
    loop {
        let mu = (dot(b2, b1) / b1.norm_sqr()).round();
        if mu != 0.0 {
            b2 -= b1 * mu;
            let m = mu as i64;
            c2 = [c2[0] - m * c1[0], c2[1] - m * c1[1]];
        }
        if b2.norm_sqr() < b1.norm_sqr() {
            std::mem::swap(&mut b1, &mut b2);
            std::mem::swap(&mut c1, &mut c2);
        } else {
            break;
        }
    }
    // ties: the lexicographically smaller coefficient vector comes first
    if b1.norm_sqr() == b2.norm_sqr() && c2 < c1 {
        std::mem::swap(&mut b1, &mut b2);
        std::mem::swap(&mut c1, &mut c2);
    }
    Reduced { lambda1: b1.norm(), lambda2: b2.norm(), b1, b2, coeffs: [c1, c2] }
}

#[inline]
fn in_closed_disc(v: Complex64, center: Complex64, r: f64) -> bool {
    (v - center).norm() <= r + GEOM_EPS
}

/// Exact number of lattice points in the closed disc of radius `r` about
/// `center`.
pub fn count_disc(lat: &Lattice2, center: Complex64, r: f64) -> u64 {
    let mut n = 0u64;
    visit_disc(lat, center, r, |_| n += 1);
    n
}

/// Calls `visit` on every lattice point in the closed disc.
///
/// Works in the reduced basis `b1, b2` with Gram-Schmidt height
/// `h = covol / |b1|`: the `b2`-coordinate of a disc point is within
/// `r / h` of that of the center, and for each such row the `b1`-coordinate
/// lies in an explicit interval.
pub fn visit_disc(lat: &Lattice2, center: Complex64, r: f64, mut visit: impl FnMut(Complex64)) {
    let red = gauss_reduce(lat);
    let (b1, b2) = (red.b1, red.b2);
    let n1 = b1.norm_sqr();
    let mu = dot(b2, b1) / n1;
    let h = lat.covolume / n1.sqrt();
    let det = b1.re * b2.im - b1.im * b2.re;
    let alpha = (center.re * b2.im - center.im * b2.re) / det;
    let beta = (b1.re * center.im - b1.im * center.re) / det;
    let rr = r + GEOM_EPS;
    let n_lo = (beta - rr / h).floor() as i64 - 1;
    let n_hi = (beta + rr / h).ceil() as i64 + 1;
    for n in n_lo..=n_hi {
        let dn = n as f64 - beta;
        let rem = rr * rr - dn * dn * h * h;
        if rem < 0.0 {
            continue;
        }
        let s = rem.sqrt() / n1.sqrt();
        let mid = alpha - dn * mu;
        let m_lo = (mid - s).floor() as i64 - 1;
        let m_hi = (mid + s).ceil() as i64 + 1;
        for m in m_lo..=m_hi {
            let v = b1 * m as f64 + b2 * n as f64;
            if in_closed_disc(v, center, r) {
                visit(v);
            }
        }
    }
}

/// Right-hand side of the disc-count bound `1 + R/λ1 + R²/(λ1 λ2)`.
pub fn disc_bound_shape(red: &Reduced, r: f64) -> f64 {
    1.0 + r / red.lambda1 + r * r / (red.lambda1 * red.lambda2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn naive_count(lat: &Lattice2, center: Complex64, r: f64, bound: i64) -> u64 {
        let mut n = 0;
        for i in -bound..=bound {
            for j in -bound..=bound {
                if in_closed_disc(lat.point(i, j), center, r) {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn reduce_examples() {
        let r = gauss_reduce(&Lattice2::new(c(1.0, 0.0), c(0.0, 1.0)).unwrap());
        assert_eq!((r.lambda1, r.lambda2), (1.0, 1.0));
        let r = gauss_reduce(&Lattice2::new(c(1.0, 0.0), c(10.0, 1.0)).unwrap());
        assert_eq!((r.lambda1, r.lambda2), (1.0, 1.0));
        let r = gauss_reduce(&Lattice2::new(c(2.0, 0.0), c(0.0, 0.5)).unwrap());
        assert_eq!((r.lambda1, r.lambda2), (0.5, 2.0));
    }

    #[test]
    fn reduce_brute_force_skewed() {
        // (1, 10+i): brute force over |m|,|n| <= 20
        let lat = Lattice2::new(c(1.0, 0.0), c(10.0, 1.0)).unwrap();
        let mut best = f64::INFINITY;
        for m in -20i64..=20 {
            for n in -20i64..=20 {
                if n != 0 {
                    best = best.min(lat.point(m, n).norm());
                }
            }
        }
        assert_eq!(best, 1.0);
        assert_eq!(gauss_reduce(&lat).lambda2, best);
    }

    #[test]
    fn degenerate_rejected() {
        assert!(Lattice2::new(c(1.0, 1.0), c(2.0, 2.0)).is_err());
    }

    #[test]
    fn tie_break_is_deterministic() {
        let r = gauss_reduce(&Lattice2::new(c(0.0, 1.0), c(1.0, 0.0)).unwrap());
        assert_eq!(r.coeffs, [[0, 1], [1, 0]]);
        assert_eq!(r.b1, c(1.0, 0.0));
    }

    #[test]
    fn disc_examples() {
        let sq = Lattice2::new(c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        assert_eq!(count_disc(&sq, c(0.0, 0.0), 1.0), 5);
        assert_eq!(count_disc(&sq, c(0.0, 0.0), 0.5), 1);
        let hex = Lattice2::new(c(1.0, 0.0), c(0.5, 3f64.sqrt() / 2.0)).unwrap();
        assert_eq!(count_disc(&hex, c(0.0, 0.0), 1.0), naive_count(&hex, c(0.0, 0.0), 1.0, 3));
        assert_eq!(count_disc(&hex, c(0.0, 0.0), 1.0), 7);
    }

    #[test]
    fn disc_bound_constant_holds() {
        let mut worst: f64 = 0.0;
        for (v2, r) in [
            (c(0.5, 3f64.sqrt() / 2.0), 1.0),
            (c(0.5, 3f64.sqrt() / 2.0), 2.0),
            (c(0.0, 1.0), 1.0),
            (c(0.3, 0.05), 0.5),
            (c(0.1, 7.0), 3.0),
            (c(0.5, 3f64.sqrt() / 2.0), 40.0),
        ] {
            let lat = Lattice2::new(c(1.0, 0.0), v2).unwrap();
            let red = gauss_reduce(&lat);
            for center in [c(0.0, 0.0), c(0.5, 0.25), c(0.5, 0.2887)] {
                let ratio = count_disc(&lat, center, r) as f64 / disc_bound_shape(&red, r);
                worst = worst.max(ratio);
            }
        }
        assert!(worst <= C_DISC, "max observed ratio {worst}");
    }

    proptest! {
        #[test]
        fn count_matches_naive(re in -3.0f64..3.0, im in 0.2f64..3.0, cx in -2.0f64..2.0,
                               cy in -2.0f64..2.0, r in 0.0f64..4.0) {
            let lat = Lattice2::new(c(1.0, 0.0), c(re, im)).unwrap();
            let center = c(cx, cy);
            // coefficient box: |n| im <= |v| and |m| <= |v| + |n||re|
            let reach = r + center.norm() + 1.0;
            let nb = (reach / im).ceil() as i64 + 1;
            let bound = ((reach + nb as f64 * re.abs()).ceil() as i64 + 1).max(nb);
            prop_assert_eq!(count_disc(&lat, center, r), naive_count(&lat, center, r, bound));
            let red = gauss_reduce(&lat);
            prop_assert!(count_disc(&lat, center, r) as f64 <= C_DISC * disc_bound_shape(&red, r));
        }

        #[test]
        fn reduce_matches_brute_force(a in -100i64..=100, b in -100i64..=100,
                                      cc in -100i64..=100, d in -100i64..=100) {
            let det = a * d - b * cc;
            prop_assume!(det != 0);
            let lat = Lattice2::new(c(a as f64, b as f64), c(cc as f64, d as f64)).unwrap();
            let red = gauss_reduce(&lat);
            // oracle: scan integer points of the plane inside the disc of radius
            // max(|v1|, |v2|) and test lattice membership by Cramer's rule
            let rad = ((a * a + b * b).max(cc * cc + d * d) as f64).sqrt().ceil() as i64;
            let mut pts: Vec<(i64, i64)> = Vec::new();
            for p in -rad..=rad {
                for q in -rad..=rad {
                    if (p, q) == (0, 0) || p * p + q * q > rad * rad { continue; }
                    // (p, q) = m (a, b) + n (cc, d)
                    let mn = p * d - q * cc;
                    let nn = a * q - b * p;
                    if mn % det == 0 && nn % det == 0 { pts.push((p, q)); }
                }
            }
            let n2 = |v: &(i64, i64)| v.0 * v.0 + v.1 * v.1;
            let l1 = pts.iter().map(n2).min().unwrap();
            let w = *pts.iter().find(|v| n2(v) == l1).unwrap();
            let l2 = pts.iter().filter(|v| v.0 * w.1 - v.1 * w.0 != 0).map(n2).min().unwrap();
            prop_assert_eq!(red.b1.norm_sqr(), l1 as f64);
            prop_assert_eq!(red.b2.norm_sqr(), l2 as f64);
            prop_assert!(red.lambda1 * red.lambda2 <= 2.0 / 3f64.sqrt() * lat.covolume + 1e-9);
            prop_assert!(red.lambda1 * red.lambda2 >= lat.covolume - 1e-9);
        }
    }
}
