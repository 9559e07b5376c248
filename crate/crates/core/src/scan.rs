//! Grid search for `sup y^{k/2} |f(z)|`, the large-`y` majorant and log-log
//! exponent fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atkin_lehner::al_reduce;
use crate::error::{Error, Result};
use crate::hyp::HPoint;
use crate::qseries::{petersson_norm, QSeries};

/// `ε` in every `k^ε` factor.
pub const SCAN_EPS: f64 = 0.1;

/// Tail tolerance of each evaluation, relative to `|a(1)|`.
const EVAL_TAIL: f64 = 1e-13;

/// Refinement grid is `REFINE_SIDE × REFINE_SIDE` points.
const REFINE_SIDE: i32 = 9;

/// Cap on the doublings of the high-`y` cutoff.
const MAX_EXTENSIONS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub nx: usize,
    pub ny: usize,
    /// Refinement rounds; each shrinks the local step by `1/8`.
    pub refine: usize,
    /// Number of grid maxima refined.
    pub top: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self { nx: 96, ny: 96, refine: 3, top: 10 }
    }
}

/// Scan rectangle; `y_hi = None` lets the Deligne majorant pick the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRect {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: Option<f64>,
}

impl ScanRect {
    /// `[0, 1) × [√3 / (2N), cutoff]`, which meets every `A_0(N)` orbit.
    pub fn reduced(level: u64) -> Self {
        Self { x_lo: 0.0, x_hi: 1.0, y_lo: 3f64.sqrt() / (2.0 * level as f64), y_hi: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `√3 / (2N) <= y <= N^{-2/3}`.
    Low,
    /// `y > N^{-2/3}`.
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridStats {
    pub nx: usize,
    pub ny: usize,
    pub refine: usize,
    pub evaluations: usize,
    pub y_lo: f64,
    pub y_hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub level: u64,
    pub weight: u32,
    pub sup_value: f64,
    /// Reduced representative of the maximizer.
    pub argmax: HPoint,
    pub region: Region,
    /// Largest value seen with reduced `y <= N^{-2/3}`, if any.
    pub low_max: Option<f64>,
    /// Largest value seen with reduced `y > N^{-2/3}`, if any.
    pub high_max: Option<f64>,
    pub petersson: f64,
    pub normalized_sup: f64,
    pub grid: GridStats,
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    raw: HPoint,
    reduced: HPoint,
    value: f64,
}

/// `max` with ties resolved towards smaller reduced `y`, then smaller `x`.
fn better(a: &Sample, b: &Sample) -> bool {
    a.value > b.value
        || (a.value == b.value
            && (a.reduced.y, a.reduced.x).partial_cmp(&(b.reduced.y, b.reduced.x)) == Some(std::cmp::Ordering::Less))
}

fn sample(f: &QSeries, raw: HPoint) -> Result<Sample> {
    let red = al_reduce(raw, f.level)?.into_result()?;
    let a1 = (f.a(1)? as f64).abs().max(1.0);
    let (value, _) = f.eval_invariant(red.z, EVAL_TAIL * a1 / red.z.y.powf(f.weight as f64 / 2.0).max(1e-300))?;
    Ok(Sample { raw, reduced: red.z, value })
}

/// Deligne majorant `y^{k/2} Σ 2 |a(1)| n^{k/2} e^{-2πny}` of `y^{k/2} |f(x + iy)|`;
/// decreasing in `y` for `y >= k / (4π)`.
pub fn deligne_majorant(f: &QSeries, y: f64) -> f64 {
    let a1 = (f.coeffs()[0] as f64).abs().max(1.0);
    let half_k = f.weight as f64 / 2.0;
    let mut total = 0.0;
    for n in 1.. {
        let t = 2.0 * a1 * (half_k * (n as f64).ln() - 2.0 * std::f64::consts::PI * n as f64 * y).exp();
        total += t;
        if t < 1e-17 * total && n as f64 * 4.0 * std::f64::consts::PI * y > f.weight as f64 {
            break;
        }
    }
    y.powf(half_k) * total
}

fn grid_points(rect: &ScanRect, y_hi: f64, nx: usize, ny: usize) -> Vec<HPoint> {
    let mut pts = Vec::with_capacity(nx * ny);
    let (ly0, ly1) = (rect.y_lo.ln(), y_hi.ln());
    for j in 0..ny {
        let t = if ny == 1 { 0.0 } else { j as f64 / (ny - 1) as f64 };
        let y = (ly0 + t * (ly1 - ly0)).exp();
        for i in 0..nx {
            let x = rect.x_lo + (rect.x_hi - rect.x_lo) * i as f64 / nx as f64;
            pts.push(HPoint { x, y });
        }
    }
    pts
}

fn best_of(samples: &[Sample]) -> Sample {
    let mut best = samples[0];
    for s in &samples[1..] {
        if better(s, &best) {
            best = *s;
        }
    }
    best
}

/// Grid search plus local refinement of `y^{k/2} |f|` over `rect`; every
/// point is reduced by `al_reduce` before evaluation. `petersson` is computed
/// to relative tolerance `1e-6` when not supplied.
pub fn scan_sup(f: &QSeries, grid: &ScanGrid, rect: &ScanRect, petersson: Option<f64>) -> Result<ScanReport> {
    if f.weight <= 2 {
        return Err(Error::UnsupportedWeight(f.weight));
    }
    if grid.nx < 2 || grid.ny < 2 || grid.top == 0 {
        return Err(Error::InvalidParameter("grid needs nx, ny >= 2 and top >= 1".into()));
    }
    if !(rect.y_lo > 0.0) || !(rect.x_hi > rect.x_lo) {
        return Err(Error::InvalidParameter("empty scan rectangle".into()));
    }
    let y_turn = f.weight as f64 / (4.0 * std::f64::consts::PI);
    let mut y_hi = match rect.y_hi {
        Some(y) if y > rect.y_lo => y,
        Some(_) => return Err(Error::InvalidParameter("y_hi must exceed y_lo".into())),
        None => (2.0 * rect.y_lo).max(y_turn).max(1.0),
    };
    let mut evaluations = 0;
    let mut samples;
    let mut extensions = 0;
    loop {
        let pts = grid_points(rect, y_hi, grid.nx, grid.ny);
        samples = pts.par_iter().map(|&z| sample(f, z)).collect::<Result<Vec<_>>>()?;
        evaluations += samples.len();
        let best = best_of(&samples);
        // above y_hi the majorant is decreasing and below the grid maximum
        if rect.y_hi.is_some() || deligne_majorant(f, y_hi) < best.value {
            break;
        }
        extensions += 1;
        if extensions > MAX_EXTENSIONS {
            return Err(Error::Inconsistent("high-y cutoff did not certify".into()));
        }
        y_hi *= 2.0;
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| samples[b].value.total_cmp(&samples[a].value).then(a.cmp(&b)));
    let dx0 = (rect.x_hi - rect.x_lo) / grid.nx as f64;
    let dly0 = (y_hi.ln() - rect.y_lo.ln()) / (grid.ny - 1) as f64;
    let seeds: Vec<Sample> = order.iter().take(grid.top).map(|&i| samples[i]).collect();
    let refined = seeds
        .par_iter()
        .map(|&seed| refine(f, seed, dx0 / 4.0, dly0 / 4.0, grid.refine))
        .collect::<Result<Vec<_>>>()?;
    let n = f.level as f64;
    let split = n.powf(-2.0 / 3.0);
    let mut low_max: Option<f64> = None;
    let mut high_max: Option<f64> = None;
    let mut all: Vec<Sample> = samples;
    for (best, count) in &refined {
        evaluations += count;
        all.push(*best);
    }
    for s in &all {
        let slot = if s.reduced.y <= split { &mut low_max } else { &mut high_max };
        *slot = Some(slot.map_or(s.value, |m: f64| m.max(s.value)));
    }
    let best = best_of(&all);
    let petersson = match petersson {
        Some(p) => p,
        None => petersson_norm(f, 1e-6)?,
    };
    Ok(ScanReport {
        level: f.level,
        weight: f.weight,
        sup_value: best.value,
        argmax: best.reduced,
        region: if best.reduced.y <= split { Region::Low } else { Region::High },
        low_max,
        high_max,
        petersson,
        normalized_sup: best.value / petersson.sqrt(),
        grid: GridStats { nx: grid.nx, ny: grid.ny, refine: grid.refine, evaluations, y_lo: rect.y_lo, y_hi },
    })
}

/// Local `9 × 9` grids in `(x, ln y)` around the running best, shrinking the
/// step by `1/8` per round.
fn refine(f: &QSeries, seed: Sample, dx: f64, dly: f64, rounds: usize) -> Result<(Sample, usize)> {
    let mut best = seed;
    let (mut dx, mut dly) = (dx, dly);
    let mut count = 0;
    let half = REFINE_SIDE / 2;
    for _ in 0..rounds {
        let centre = best.raw;
        let pts: Vec<HPoint> = (-half..=half)
            .flat_map(|j| {
                (-half..=half)
                    .map(move |i| HPoint { x: centre.x + i as f64 * dx, y: centre.y * (j as f64 * dly).exp() })
            })
            .collect();
        let local = pts.par_iter().map(|&z| sample(f, z)).collect::<Result<Vec<_>>>()?;
        count += local.len();
        let cand = best_of(&local);
        if better(&cand, &best) {
            best = cand;
        }
        dx /= 8.0;
        dly /= 8.0;
    }
    Ok((best, count))
}

fn ln_gamma_int(k: u32) -> f64 {
    (1..k).map(|j| (j as f64).ln()).sum()
}

/// Large-`y` bound for `y^{k/2} |f(x + iy)|` in the normalization of
/// `⟨f, f⟩^{1/2} N^{-1/2}`, with the regime switch at `y = k / (4π)`.
pub fn highy_bound(weight: u32, level: u64, petersson: f64, y: f64) -> f64 {
    let k = weight as f64;
    let e = SCAN_EPS;
    let first = k.powf(0.25 + e) * y.powf(-0.5);
    let second = if y <= k / (4.0 * std::f64::consts::PI) {
        y.sqrt() * k.powf(e - 0.25)
    } else {
        let ln = (k / 2.0) * 2f64.ln() + e * k.ln() + (k / 2.0 + e) * (2.0 * std::f64::consts::PI * y).ln()
            - 2.0 * std::f64::consts::PI * y
            - 0.5 * ln_gamma_int(weight);
        ln.exp()
    };
    (first + second) * (petersson / level as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

/// Least squares of `ln sup` against `ln N`.
pub fn fit_exponent(table: &[(f64, f64)]) -> Result<ExponentFit> {
    if table.iter().any(|&(n, s)| !(n > 0.0) || !(s > 0.0)) {
        return Err(Error::InvalidParameter("levels and sup values must be positive".into()));
    }
    let first = table.first().map(|t| t.0);
    if table.len() < 2 || table.iter().all(|t| Some(t.0) == first) {
        return Err(Error::InvalidParameter("need at least two distinct levels".into()));
    }
    let pts: Vec<(f64, f64)> = table.iter().map(|&(n, s)| (n.ln(), s.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = pts.iter().map(|p| p.1 - (intercept + slope * p.0)).collect();
    Ok(ExponentFit { slope, intercept, residuals })
}
