//! Upper half-plane points, integral 2x2 matrices, the fractional linear
//! action and the u-invariant `u_g(z) = j(g, z) (conj(z) - g.z) / Im z`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack used for geometric comparisons.
pub const GEOM_EPS: f64 = 1e-9;

/// A point `x + iy` with `y > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
}

impl HPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::NotInUpperHalfPlane(y));
        }
        Ok(Self { x, y })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn i() -> Self {
        Self { x: 0.0, y: 1.0 }
    }

    #[inline]
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// `-conj(z)`, the reflection across the imaginary axis.
    pub fn reflect(self) -> Self {
        Self { x: -self.x, y: self.y }
    }

    pub fn translate(self, t: f64) -> Self {
        Self { x: self.x + t, y: self.y }
    }
}

impl fmt::Display for HPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}i", self.x, self.y)
    }
}

/// An integral matrix `(a, b; c, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntMat {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl IntMat {
    pub const IDENTITY: IntMat = IntMat { a: 1, b: 0, c: 0, d: 1 };
    /// The inversion `(0, -1; 1, 0)`.
    pub const S: IntMat = IntMat { a: 0, b: -1, c: 1, d: 0 };

    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self { a, b, c, d }
    }

    pub const fn translation(t: i64) -> Self {
        Self { a: 1, b: t, c: 0, d: 1 }
    }

    #[inline]
    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    #[inline]
    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }

    pub fn mul(&self, o: &IntMat) -> IntMat {
        IntMat {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Sort key for the canonical `(c, d, a, b)` ordering.
    pub fn canonical_key(&self) -> (i64, i64, i64, i64) {
        (self.c, self.d, self.a, self.b)
    }

    /// Membership in `G_l(N)`: `N | c` and `det = l`.
    pub fn in_gl(&self, level: i64, l: i64) -> bool {
        self.c % level == 0 && self.det() == l
    }

    fn checked_positive(&self) -> Result<()> {
        let det = self.det();
        if det <= 0 {
            return Err(Error::NonPositiveDeterminant(det));
        }
        Ok(())
    }
}

impl fmt::Display for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}; {}, {})", self.a, self.b, self.c, self.d)
    }
}

/// Sort a matrix list into the canonical `(c, d, a, b)` order.
pub fn sort_canonical(list: &mut [IntMat]) {
    list.sort_unstable_by_key(IntMat::canonical_key);
}

/// The three classes partitioning `G_l(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatClass {
    Generic,
    UpperTriangular,
    Parabolic,
}

/// `(a z + b) / (c z + d)` for a matrix of positive determinant.
pub fn moebius(m: &IntMat, z: HPoint) -> Result<HPoint> {
    m.checked_positive()?;
    Ok(moebius_unchecked(m, z))
}

#[inline]
pub(crate) fn moebius_unchecked(m: &IntMat, z: HPoint) -> HPoint {
    moebius_real(m.a as f64, m.b as f64, m.c as f64, m.d as f64, z)
}

/// Fractional linear action of a real matrix with positive determinant.
///
/// The imaginary part is computed as `det * y / |cz + d|^2` so it stays
/// positive even when `|cz + d|` is large.
#[inline]
pub fn moebius_real(a: f64, b: f64, c: f64, d: f64, z: HPoint) -> HPoint {
    let wr = c * z.x + d;
    let wi = c * z.y;
    let den = wr * wr + wi * wi;
    let nr = a * z.x + b;
    let ni = a * z.y;
    let x = (nr * wr + ni * wi) / den;
    let y = (a * d - b * c) * z.y / den;
    HPoint { x, y }
}

/// `j(m, z) = c z + d`.
pub fn cocycle_j(m: &IntMat, z: HPoint) -> Complex64 {
    Complex64::new(m.c as f64 * z.x + m.d as f64, m.c as f64 * z.y)
}

/// The u-invariant of an integral matrix with positive determinant.
pub fn u_value(m: &IntMat, z: HPoint) -> Result<Complex64> {
    m.checked_positive()?;
    Ok(u_unchecked(m, z))
}

#[inline]
pub(crate) fn u_unchecked(m: &IntMat, z: HPoint) -> Complex64 {
    u_real(m.a as f64, m.b as f64, m.c as f64, m.d as f64, z)
}

/// u-invariant of a real matrix.
///
/// Expanding `(cz + d) conj(z) - (az + b)` gives
/// `u = (c|z|^2 + (d - a) x - b) / y - i (a + d)`, which is linear in the
/// entries and avoids the cancellation in `conj(z) - g.z`.
#[inline]
pub fn u_real(a: f64, b: f64, c: f64, d: f64, z: HPoint) -> Complex64 {
    let re = (c * z.norm_sqr() + (d - a) * z.x - b) / z.y;
    Complex64::new(re, -(a + d))
}

/// `|u| <= delta` with the module slack.
#[inline]
pub fn within_delta(u: Complex64, delta: f64) -> bool {
    u.norm() <= delta + GEOM_EPS
}

/// Classify a matrix of determinant `l` into the generic / upper-triangular /
/// parabolic trichotomy.
pub fn classify(m: &IntMat, l: i64) -> Result<MatClass> {
    let det = m.det();
    if det != l {
        return Err(Error::DeterminantMismatch { det, l });
    }
    let t = m.trace();
    if t * t == 4 * l {
        Ok(MatClass::Parabolic)
    } else if m.c == 0 && m.a != m.d {
        Ok(MatClass::UpperTriangular)
    } else if m.c != 0 {
        Ok(MatClass::Generic)
    } else {
        Err(Error::Inconsistent(format!("c = 0 and a = d but trace^2 != 4l for {m}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z(x: f64, y: f64) -> HPoint {
        HPoint::new(x, y).unwrap()
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(HPoint::new(0.0, 0.0).is_err());
        assert!(HPoint::new(1.0, -2.0).is_err());
    }

    #[test]
    fn moebius_examples() {
        assert_eq!(moebius(&IntMat::IDENTITY, z(2.0, 3.0)).unwrap(), z(2.0, 3.0));
        let w = moebius(&IntMat::S, HPoint::i()).unwrap();
        assert!((w.x).abs() < 1e-15 && (w.y - 1.0).abs() < 1e-15);
        assert_eq!(moebius(&IntMat::translation(1), HPoint::i()).unwrap(), z(1.0, 1.0));
        assert!(moebius(&IntMat::new(1, 0, 0, -1), HPoint::i()).is_err());
    }

    #[test]
    fn cocycle_examples() {
        assert_eq!(cocycle_j(&IntMat::IDENTITY, z(0.3, 0.2)), Complex64::new(1.0, 0.0));
        assert_eq!(cocycle_j(&IntMat::S, HPoint::i()), Complex64::new(0.0, 1.0));
        assert_eq!(cocycle_j(&IntMat::new(2, 1, 6, 4), z(1.0, 1.0)), Complex64::new(10.0, 6.0));
    }

    #[test]
    fn u_value_examples() {
        let u = u_value(&IntMat::IDENTITY, z(0.7, 2.5)).unwrap();
        assert!((u - Complex64::new(0.0, -2.0)).norm() < 1e-15);
        let u = u_value(&IntMat::S, HPoint::i()).unwrap();
        assert!((u - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let (t, p) = (3.0, z(0.4, 0.5));
        let u = u_value(&IntMat::translation(3), p).unwrap();
        assert!((u - Complex64::new(-t / p.y, -2.0)).norm() < 1e-14);
        assert!((u.norm_sqr() - (4.0 + t * t / (p.y * p.y))).abs() < 1e-12);
    }

    #[test]
    fn u_value_matches_definition() {
        let m = IntMat::new(3, 7, 10, 24);
        let p = z(0.31, 0.77);
        let gz = moebius(&m, p).unwrap().to_complex();
        let direct = cocycle_j(&m, p) * (p.to_complex().conj() - gz) / p.y;
        assert!((direct - u_value(&m, p).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&IntMat::new(2, 0, 0, 2), 4).unwrap(), MatClass::Parabolic);
        assert_eq!(classify(&IntMat::new(2, 1, 0, 3), 6).unwrap(), MatClass::UpperTriangular);
        assert_eq!(classify(&IntMat::new(1, 0, 5, 1), 1).unwrap(), MatClass::Parabolic);
        assert_eq!(classify(&IntMat::S, 1).unwrap(), MatClass::Generic);
        assert!(matches!(classify(&IntMat::new(2, 0, 0, 3), 5), Err(Error::DeterminantMismatch { .. })));
    }

    fn conj_real(g: [f64; 4], m: &IntMat) -> [f64; 4] {
        // g^{-1} m g for det g = 1
        let [ga, gb, gc, gd] = g;
        let (ia, ib, ic, id) = (gd, -gb, -gc, ga);
        let (ma, mb, mc, md) = (m.a as f64, m.b as f64, m.c as f64, m.d as f64);
        let (pa, pb, pc, pd) = (ma * ga + mb * gc, ma * gb + mb * gd, mc * ga + md * gc, mc * gb + md * gd);
        [ia * pa + ib * pc, ia * pb + ib * pd, ic * pa + id * pc, ic * pb + id * pd]
    }

    proptest! {
        #[test]
        fn u_lower_bound(a in -50i64..=50, b in -50i64..=50, c in -50i64..=50, d in -50i64..=50,
                             x in -2.0f64..2.0, y in 0.05f64..3.0) {
            let m = IntMat::new(a, b, c, d);
            let l = m.det();
            prop_assume!(l > 0);
            let u = u_value(&m, z(x, y)).unwrap();
            prop_assert!(u.norm() >= 2.0 * (l as f64).sqrt() - 1e-9);
        }

        #[test]
        fn conjugation_covariance(a in -9i64..=9, b in -9i64..=9, c in -9i64..=9, d in -9i64..=9,
                                  ga in 0.3f64..2.0, gb in -2.0f64..2.0, gc in -2.0f64..2.0,
                                  x in -1.0f64..1.0, y in 0.2f64..2.0) {
            let m = IntMat::new(a, b, c, d);
            prop_assume!(m.det() > 0);
            // complete (ga, gb; gc, gd) to determinant one
            let gd = (1.0 + gb * gc) / ga;
            let g = [ga, gb, gc, gd];
            let p = z(x, y);
            let [ca, cb, cc, cd] = conj_real(g, &m);
            let lhs = u_real(ca, cb, cc, cd, p).norm();
            let gp = moebius_real(ga, gb, gc, gd, p);
            let rhs = u_unchecked(&m, gp).norm();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
        }
    }
}
