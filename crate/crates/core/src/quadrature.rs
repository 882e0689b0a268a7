//! Gauss–Kronrod and Simpson quadrature.

#![allow(clippy::excessive_precision)]

use crate::error::{LabError, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod abscissae (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod panel. Returns `(kronrod, |kronrod - gauss|)`.
pub fn gauss_kronrod15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = radius * T::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * pair;
        }
    }
    (kronrod * radius, ((kronrod - gauss) * radius).abs())
}

/// Adaptive bisection on 15-point Kronrod panels.
///
/// Converges when the summed panel error estimate drops below
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    const MAX_PANELS: usize = 4000;
    let (v, e) = gauss_kronrod15(&mut f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let total: T = panels.iter().map(|p| p.2).sum();
        let err: T = panels.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(LabError::NumericalFailure(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        let target = abs_tol.max(rel_tol * total.abs());
        if err <= target {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(LabError::NumericalFailure(format!(
                "quadrature on [{a}, {b}] did not converge (error estimate {err:e})"
            )));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, p)| {
                if p.3 > acc.1 {
                    (i, p.3)
                } else {
                    acc
                }
            });
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let mid = T::lit(0.5) * (pa + pb);
        if mid <= pa || mid >= pb {
            // panel exhausted at machine resolution; accept what we have
            let total: T = panels.iter().map(|p| p.2).sum::<T>() + gauss_kronrod15(&mut f, pa, pb).0;
            return Ok(total);
        }
        let (v1, e1) = gauss_kronrod15(&mut f, pa, mid);
        let (v2, e2) = gauss_kronrod15(&mut f, mid, pb);
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
}

/// Composite Simpson rule on uniformly spaced samples with spacing `h`.
///
/// An odd number of intervals is closed with Simpson's 3/8 rule on the last
/// three intervals.
pub fn simpson<T: Real>(values: &[T], h: T) -> T {
    let n = values.len();
    match n {
        0 | 1 => T::zero(),
        2 => T::lit(0.5) * h * (values[0] + values[1]),
        3 => h / T::lit(3.0) * (values[0] + T::lit(4.0) * values[1] + values[2]),
        _ => {
            let intervals = n - 1;
            let (even_end, tail) = if intervals.is_multiple_of(2) {
                (n - 1, T::zero())
            } else {
                let k = n - 4;
                let t = T::lit(3.0) * h / T::lit(8.0)
                    * (values[k]
                        + T::lit(3.0) * values[k + 1]
                        + T::lit(3.0) * values[k + 2]
                        + values[k + 3]);
                (k, t)
            };
            let mut acc = values[0] + values[even_end];
            for (i, &v) in values.iter().enumerate().take(even_end).skip(1) {
                acc = acc + if i % 2 == 1 { T::lit(4.0) * v } else { T::lit(2.0) * v };
            }
            acc * h / T::lit(3.0) + tail
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_panel_is_exact_for_polynomials() {
        let mut f = |x: f64| x.powi(9) - 3.0 * x.powi(4) + 1.0;
        let (v, _) = gauss_kronrod15(&mut f, -1.0, 2.0);
        let exact = (2f64.powi(10) - 1.0) / 10.0 - 3.0 * (32.0 + 1.0) / 5.0 + 3.0;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let v = integrate(|x: f64| x.sqrt(), 0.0, 1.0, 1e-13, 1e-13).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn adaptive_reports_non_finite_integrand() {
        let r = integrate(|_x: f64| f64::NAN, 0.0, 1.0, 1e-14, 1e-14);
        assert!(matches!(r, Err(LabError::NumericalFailure(_))));
    }

    #[test]
    fn simpson_even_and_odd_interval_counts() {
        for n in [5usize, 6, 101, 102] {
            let h = std::f64::consts::PI / (n - 1) as f64;
            let vals: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
            let v = simpson(&vals, h);
            assert!((v - 2.0).abs() < 5e-3 * (6.0 / n as f64).powi(4) + 1e-10, "n={n} v={v}");
        }
    }
}
