//! Adaptive Gauss-Kronrod (7, 15) quadrature.

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Kronrod estimate and `|K - G|` on one panel.
fn panel(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let (f1, f2) = (f(c - h * XGK[j]), f(c + h * XGK[j]));
        k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// `∫_a^b f` to absolute error `abs_tol` (summed panel error estimates),
/// bisecting the worst panel first; at most `max_panels` panels.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64, max_panels: usize) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let (v, e) = panel(&mut f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let err: f64 = panels.iter().map(|p| p.3).sum();
        let val: f64 = panels.iter().map(|p| p.2).sum();
        if err <= abs_tol {
            return Ok((val, err));
        }
        if panels.len() >= max_panels {
            return Err(Error::QuadratureBudget { tol: abs_tol, estimate: err });
        }
        let worst = (0..panels.len()).max_by(|&i, &j| panels[i].3.total_cmp(&panels[j].3)).expect("nonempty");
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            return Err(Error::QuadratureBudget { tol: abs_tol, estimate: err });
        }
        let (v1, e1) = panel(&mut f, pa, mid);
        let (v2, e2) = panel(&mut f, mid, pb);
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_smooth_functions() {
        let (v, _) = integrate(|x| x.powi(6), 0.0, 1.0, 1e-14, 100).unwrap();
        assert!((v - 1.0 / 7.0).abs() < 1e-15);
        let (v, _) = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-12, 1000).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let (v, _) = integrate(|x| x.sqrt(), 0.0, 1.0, 1e-10, 1000).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
        let (v, _) = integrate(|x| (-x).exp(), 0.0, 40.0, 1e-12, 1000).unwrap();
        assert!((v - (1.0 - (-40f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn budget_is_reported() {
        assert!(matches!(
            integrate(|x| 1.0 / x.abs().max(1e-300).sqrt(), -1.0, 1.0, 1e-14, 5),
            Err(Error::QuadratureBudget { .. })
        ));
    }
}
