//! Geometric side of the pre-trace formula at `w = -z̄`: sums of `u_α(z)^{-k}`
//! over `G_l(N)`, their amplified combination and the spectral comparison on
//! one-dimensional spaces.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::census::{enumerate_dets, parabolic_sum};
use crate::error::{Error, Result};
use crate::hyp::{classify, u_unchecked, HPoint, MatClass};
use crate::qseries::QSeries;

/// `Σ_{γ ∈ Γ_0(N)} u_γ(z)^{-k} = PM_CONVENTION_FACTOR · C_k · y^k |f(z)|² / ⟨f, f⟩`
/// on one-dimensional spaces, with `γ` and `-γ` both summed.
pub const PM_CONVENTION_FACTOR: f64 = 1.0;

/// Certified tail tolerance of the parabolic part.
pub const PARABOLIC_TAIL_TOL: f64 = 1e-12;

/// Number of radii used to fit the census growth.
const FIT_SAMPLES: usize = 8;

/// `C_k = (-1)^{k/2} π / (2^{k-3} (k - 1))`.
pub fn c_k(k: u32) -> Result<f64> {
    if k < 4 || !k.is_multiple_of(2) {
        return Err(Error::UnsupportedWeight(k));
    }
    let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * std::f64::consts::PI / (2f64.powi(k as i32 - 3) * (k as f64 - 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSum {
    pub value: Complex64,
    /// `δ_max` of the non-parabolic census.
    pub truncation: f64,
    pub tail_estimate: f64,
    pub terms: usize,
}

/// Tail of `Σ_{|u| > δ} |u|^{-k}` from a growth fit `count(δ) <= B δ²`
/// over radii in `[δ_max / 2, δ_max]`: `k B ∫_{δ_max}^∞ δ^{1-k} dδ`.
fn growth_tail(mut norms: Vec<f64>, delta_max: f64, k: u32) -> f64 {
    norms.sort_by(f64::total_cmp);
    let mut b: f64 = 0.0;
    for j in 0..FIT_SAMPLES {
        let r = delta_max * (0.5 + 0.5 * j as f64 / (FIT_SAMPLES - 1) as f64);
        let count = norms.partition_point(|&u| u <= r);
        b = b.max(count as f64 / (r * r));
    }
    let kf = k as f64;
    b * kf / (kf - 2.0) * delta_max.powf(2.0 - kf)
}

/// `Σ_{α ∈ G_l(N)} u_α(z)^{-k}`: non-parabolic `α` with `|u| <= δ_max`, plus
/// the full parabolic part with certified tail `PARABOLIC_TAIL_TOL`.
pub fn kernel_sum(z: HPoint, level: u64, l: i64, k: u32, delta_max: f64) -> Result<KernelSum> {
    c_k(k)?;
    if l <= 0 || level == 0 {
        return Err(Error::InvalidParameter("l and N must be positive".into()));
    }
    if !(delta_max >= 0.0) {
        return Err(Error::InvalidParameter(format!("delta_max must be non-negative, got {delta_max}")));
    }
    let mats = enumerate_dets(z, level as i64, l, l, delta_max);
    let mut us: Vec<Complex64> = Vec::with_capacity(mats.len());
    for m in &mats {
        if classify(m, l)? != MatClass::Parabolic {
            us.push(u_unchecked(m, z));
        }
    }
    // fixed order: |u| descending
    us.sort_by(|a, b| b.norm_sqr().total_cmp(&a.norm_sqr()).then(a.re.total_cmp(&b.re)).then(a.im.total_cmp(&b.im)));
    let mut value: Complex64 = us.iter().map(|u| u.inv().powi(k as i32)).sum();
    let para = parabolic_sum(z, level, l, k, PARABOLIC_TAIL_TOL)?;
    value += para.signed;
    let tail = growth_tail(us.iter().map(|u| u.norm()).collect(), delta_max, k) + para.tail_bound;
    Ok(KernelSum { value, truncation: delta_max, tail_estimate: tail, terms: us.len() + para.terms })
}

/// `y^k h(z, -z̄) = Σ_{γ ∈ Γ_0(N)} u_γ(z)^{-k}` for even `k`.
pub fn geometric_h(z: HPoint, level: u64, k: u32, delta_max: f64) -> Result<KernelSum> {
    if !(delta_max >= 2.0) {
        return Err(Error::InvalidParameter(format!("delta_max must be at least 2, got {delta_max}")));
    }
    kernel_sum(z, level, 1, k, delta_max)
}

/// `Σ_l y_l l^{(k-1)/2} Σ_{α ∈ G_l(N)} u_α(z)^{-k}`, the census for `l`
/// truncated at `δ_max √l` (every `|u_α| >= 2√l`).
pub fn amplified_geometric(z: HPoint, level: u64, k: u32, y: &BTreeMap<u64, i64>, delta_max: f64) -> Result<KernelSum> {
    let entries: Vec<(u64, i64)> = y.iter().map(|(&l, &v)| (l, v)).collect();
    let parts = entries
        .par_iter()
        .map(|&(l, _)| kernel_sum(z, level, l as i64, k, delta_max * (l as f64).sqrt()))
        .collect::<Result<Vec<_>>>()?;
    let mut out = KernelSum { value: Complex64::new(0.0, 0.0), truncation: delta_max, tail_estimate: 0.0, terms: 0 };
    for (&(l, yl), part) in entries.iter().zip(&parts) {
        let w = yl as f64 * (l as f64).powf((k as f64 - 1.0) / 2.0);
        out.value += part.value * w;
        out.tail_estimate += part.tail_estimate * w.abs();
        out.terms += part.terms;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralCheck {
    /// `Σ u^{-k} / (PM_CONVENTION_FACTOR · C_k)`.
    pub geometric: f64,
    /// `y^k |f(z)|² / ⟨f, f⟩`.
    pub spectral: f64,
    pub residual: f64,
    pub tail_estimate: f64,
}

/// Compare both sides of the pre-trace identity for `f` spanning `S_k(N)`.
pub fn spectral_residual(f: &QSeries, z: HPoint, delta_max: f64, petersson: f64) -> Result<SpectralCheck> {
    let k = f.weight;
    let ck = c_k(k)?;
    if !(petersson > 0.0) {
        return Err(Error::InvalidParameter("Petersson norm must be positive".into()));
    }
    let h = geometric_h(z, f.level, k, delta_max)?;
    let scale = PM_CONVENTION_FACTOR * ck;
    let geometric = h.value.re / scale;
    let (inv, _) = f.eval_invariant(z, 1e-13)?;
    let spectral = inv * inv / petersson;
    Ok(SpectralCheck {
        geometric,
        spectral,
        residual: (geometric - spectral).abs() / spectral,
        tail_estimate: h.tail_estimate / scale.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_k_examples() {
        use std::f64::consts::PI;
        assert!((c_k(4).unwrap() - PI / 6.0).abs() < 1e-15);
        assert!((c_k(12).unwrap() - PI / 5632.0).abs() < 1e-17);
        assert!((c_k(6).unwrap() + PI / 40.0).abs() < 1e-15);
        assert!(c_k(5).is_err());
        assert!(c_k(2).is_err());
    }

    #[test]
    fn geometric_examples() {
        let h = geometric_h(HPoint::i(), 1, 12, 2.0001).unwrap();
        assert!(h.value.re > 0.0);
        assert!(h.value.im.abs() < 1e-12 * h.value.re);
        // ±S are the only non-parabolic terms; ±I lead the parabolic part
        let para = parabolic_sum(HPoint::i(), 1, 1, 12, PARABOLIC_TAIL_TOL).unwrap();
        assert!((h.value - para.signed - 2.0 * 2f64.powi(-12)).norm() < 1e-16);
        assert!(para.value >= 2.0 * 2f64.powi(-12));
        let z = HPoint::new(0.17, 0.83).unwrap();
        let a = geometric_h(z, 5, 4, 10.0).unwrap();
        let b = geometric_h(z, 5, 4, 20.0).unwrap();
        assert!((a.value - b.value).norm() < a.tail_estimate, "{:?} {:?}", a, b);
        assert!(a.value.im.abs() < 1e-10 * a.value.re.abs());
    }

    #[test]
    fn amplified_single_term() {
        let z = HPoint::new(0.1, 0.7).unwrap();
        let y = BTreeMap::from([(1u64, 1i64)]);
        let a = amplified_geometric(z, 5, 4, &y, 12.0).unwrap();
        let g = geometric_h(z, 5, 4, 12.0).unwrap();
        assert_eq!(a.value, g.value);
    }
}
