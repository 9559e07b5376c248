//! Truncated q-expansions with exact integer coefficients: eta quotients,
//! Hecke certification, normalized coefficients, certified pointwise
//! evaluation and Petersson norms.

mod catalog;
mod eta;
mod hecke;
mod petersson;

pub use catalog::{
    catalog, export_coeff_table, load_coeff_table, load_form, parse_coeff_table, CatalogEntry, FormSource, DATA_DIR_ENV,
};
pub use eta::{eta_expand, EtaQuotient, MAX_TRUNCATION};
pub use hecke::{deligne_violation, hecke_check, HeckeReport};
pub use petersson::{coset_reps, fundamental_domain_integral, petersson_norm};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::divisor_count;
use crate::error::{Error, Result};
use crate::hyp::HPoint;

/// `f = Σ_{n >= 1} a(n) q^n` truncated at `q^M`; `coeffs[0] = a(0) = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QSeries {
    pub level: u64,
    pub weight: u32,
    coeffs: Vec<i128>,
}

impl QSeries {
    /// `coeffs` holds `a(1..=M)`.
    pub fn new(level: u64, weight: u32, coeffs: &[i128]) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidParameter("level must be positive".into()));
        }
        if coeffs.is_empty() {
            return Err(Error::BadTable("no coefficients".into()));
        }
        let mut c = Vec::with_capacity(coeffs.len() + 1);
        c.push(0);
        c.extend_from_slice(coeffs);
        Ok(Self { level, weight, coeffs: c })
    }

    /// Truncation length `M`.
    pub fn len(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `a(1..=M)`.
    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs[1..]
    }

    pub fn a(&self, n: usize) -> Result<i128> {
        self.coeffs.get(n).copied().ok_or(Error::IndexOutOfRange { n, m: self.len() })
    }

    /// Coefficients up to `q^m`.
    pub fn truncate(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.len() {
            return Err(Error::IndexOutOfRange { n: m, m: self.len() });
        }
        Ok(Self { level: self.level, weight: self.weight, coeffs: self.coeffs[..=m].to_vec() })
    }

    /// `c f`.
    pub fn scaled(&self, c: i128) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, a)| a.checked_mul(c).ok_or(Error::Overflow(n)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { level: self.level, weight: self.weight, coeffs })
    }

    /// Divide through by `a(1) ∈ {±1}`.
    pub fn normalized(&self) -> Result<Self> {
        match self.coeffs[1] {
            1 => Ok(self.clone()),
            -1 => self.scaled(-1),
            a1 => Err(Error::BadTable(format!("a(1) = {a1} is not a unit"))),
        }
    }

    /// `ψ(n) = a(n) / (a(1) n^{(k-1)/2})`.
    pub fn psi(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidParameter("psi is indexed from 1".into()));
        }
        let a1 = self.coeffs[1];
        if a1 == 0 {
            return Err(Error::BadTable("a(1) = 0".into()));
        }
        Ok(self.a(n)? as f64 / (a1 as f64 * (n as f64).powf((self.weight as f64 - 1.0) / 2.0)))
    }

    /// Hecke eigenvalue `λ(n)` in the normalization `λ(p)² - λ(p²) = 1`.
    pub fn lam(&self, n: usize) -> Result<f64> {
        self.psi(n)
    }

    /// Smallest `n0` whose Deligne tail `Σ_{n > n0} |a(1)| τ(n) n^{(k-1)/2} e^{-2πny}`
    /// is at most `tail_tol`, with that tail bound.
    ///
    /// `τ(n) <= 2√n`, so the terms are majorized by `g(n) = 2|a(1)| n^{k/2} e^{-2πny}`
    /// whose ratio `(1 + 1/n)^{k/2} e^{-2πy}` decreases in `n`.
    pub fn truncation_for(&self, y: f64, tail_tol: f64) -> Result<(usize, f64)> {
        let a1 = (self.coeffs[1] as f64).abs().max(1.0);
        let half_k = self.weight as f64 / 2.0;
        let g = |n: f64| 2.0 * a1 * (half_k * n.ln() - 2.0 * std::f64::consts::PI * n * y).exp();
        for n0 in 1..=self.len() {
            let next = (n0 + 1) as f64;
            let ratio = (1.0 + 1.0 / next).powf(half_k) * (-2.0 * std::f64::consts::PI * y).exp();
            if ratio < 1.0 {
                let tail = g(next) / (1.0 - ratio);
                if tail <= tail_tol {
                    return Ok((n0, tail));
                }
            }
        }
        Err(Error::TruncationInsufficient { m: self.len(), tol: tail_tol, y })
    }

    /// `f(z)` with a certified bound on the discarded tail.
    pub fn eval(&self, z: HPoint, tail_tol: f64) -> Result<(Complex64, f64)> {
        let (n0, tail) = self.truncation_for(z.y, tail_tol)?;
        Ok((self.partial_sum(z, n0), tail))
    }

    /// `Σ_{n <= n0} a(n) e(nz)` by Horner's rule.
    pub fn partial_sum(&self, z: HPoint, n0: usize) -> Complex64 {
        let n0 = n0.min(self.len());
        let q = Complex64::from_polar(
            (-2.0 * std::f64::consts::PI * z.y).exp(),
            2.0 * std::f64::consts::PI * z.x.rem_euclid(1.0),
        );
        let mut acc = Complex64::new(0.0, 0.0);
        for n in (1..=n0).rev() {
            acc = acc * q + self.coeffs[n] as f64;
        }
        acc * q
    }

    /// `y^{k/2} |f(z)|` with the tail scaled likewise.
    pub fn eval_invariant(&self, z: HPoint, tail_tol: f64) -> Result<(f64, f64)> {
        let (v, tail) = self.eval(z, tail_tol)?;
        let s = z.y.powf(self.weight as f64 / 2.0);
        Ok((s * v.norm(), s * tail))
    }
}

/// `f(z)` and its certified tail.
pub fn eval_form(f: &QSeries, z: HPoint, tail_tol: f64) -> Result<(Complex64, f64)> {
    f.eval(z, tail_tol)
}

/// `ψ(n)`.
pub fn psi(f: &QSeries, n: usize) -> Result<f64> {
    f.psi(n)
}

/// `λ(n)`.
pub fn lam(f: &QSeries, n: usize) -> Result<f64> {
    f.lam(n)
}

/// `τ(n)` as used by the Deligne bound.
pub fn tau(n: usize) -> u64 {
    divisor_count(n as u64)
}
