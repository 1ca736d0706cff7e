//! P2 Lagrange interpolation on `{a, c, b}`, the corrected quasi-interpolant
//! Π*, and the associated sup-norm error bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{DerivativeBounds, FunctionHandle, Interval};
use crate::sign::SignVariant;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

fn check_inside(iv: &Interval, x: f64) -> Result<()> {
    if !iv.contains(x) {
        return Err(Error::OutsideInterval {
            x,
            a: iv.a(),
            b: iv.b(),
        });
    }
    Ok(())
}

/// Quadratic Lagrange interpolant through `(a, fa)`, `(c, fc)`, `(b, fb)`.
pub fn p2_interpolate(fa: f64, fb: f64, fc: f64, iv: &Interval, x: f64) -> Result<f64> {
    check_inside(iv, x)?;
    let (a, b, c) = (iv.a(), iv.b(), iv.c());
    let la = (x - c) * (x - b) / ((a - c) * (a - b));
    let lb = (x - a) * (x - c) / ((b - a) * (b - c));
    let lc = (x - a) * (x - b) / ((c - a) * (c - b));
    Ok(la * fa + lb * fb + lc * fc)
}

/// `(sup bound, oscillation bound)` for `|f - Π|`:
/// `(b-a)³ max|f'''| / (72√3)` and `(b-a)³ (2M₃ - m₃) / (72√3)`.
pub fn p2_error_bounds(bounds: &DerivativeBounds, iv: &Interval) -> Result<(f64, f64)> {
    let third = bounds.third()?;
    let scale = iv.width().powi(3) / (72.0 * SQRT_3);
    Ok((scale * third.abs_max(), scale * (2.0 * third.hi - third.lo)))
}

/// `(b-a)³ (2M₃ - m₃) / (1536√3)`, the bound on `|f - Π*|`.
pub fn corrected_bound(bounds: &DerivativeBounds, iv: &Interval) -> Result<f64> {
    let third = bounds.third()?;
    Ok(iv.width().powi(3) * (2.0 * third.hi - third.lo) / (1536.0 * SQRT_3))
}

/// `(b-a)⁴ max(|m₄|, |M₄|) / 1296`, the classical bound for cubic Lagrange
/// interpolation. Only the bound is provided, for comparison with Π*.
pub fn cubic_lagrange_bound(bounds: &DerivativeBounds, iv: &Interval) -> Result<f64> {
    Ok(iv.width().powi(4) * bounds.fourth()?.abs_max() / 1296.0)
}

/// The corrected interpolant Π*(f)(x) with the validated sign pattern.
pub fn corrected_interpolant(h: &FunctionHandle, iv: &Interval, x: f64) -> Result<f64> {
    corrected_interpolant_with(h, iv, x, SignVariant::Validated)
}

/// Π*(f)(x) = Π(f)(x) ∓ T₁(x) − T₂(x) where, with `w(x) = (x-a)(b-x)(c-x)/(b-a)²`,
///
/// * `T₁ = w · [ (f'(a) - 2f'(c) + f'(b))/2 + f'((x+a)/2) - 2f'((x+c)/2) + f'((x+b)/2) ]`
/// * `T₂ = 3w/64 · [ f''(a)(a-x) + 2f''(c)(x-c) + f''(b)(b-x) ]`
///
/// `Paper` subtracts T₁, `Validated` adds it. Only the validated form obeys
/// [`corrected_bound`]. Π* is a pointwise quasi-interpolant: f' is evaluated
/// at x-dependent points, so it is not a fixed polynomial for general f.
pub fn corrected_interpolant_with(
    h: &FunctionHandle,
    iv: &Interval,
    x: f64,
    variant: SignVariant,
) -> Result<f64> {
    check_inside(iv, x)?;
    let (a, b, c) = (iv.a(), iv.b(), iv.c());
    let p2 = p2_interpolate(h.value(a)?, h.value(b)?, h.value(c)?, iv, x)?;

    let w = iv.width();
    let weight = (x - a) * (b - x) * (c - x) / (w * w);
    if weight == 0.0 {
        return Ok(p2);
    }

    let d1 = |t: f64| h.eval(t, 1);
    let d2 = |t: f64| h.eval(t, 2);
    let bracket1 = (d1(a)? - 2.0 * d1(c)? + d1(b)?) / 2.0 + d1(0.5 * (x + a))?
        - 2.0 * d1(0.5 * (x + c))?
        + d1(0.5 * (x + b))?;
    let t1 = weight * bracket1;
    let bracket2 = d2(a)? * (a - x) + 2.0 * d2(c)? * (x - c) + d2(b)? * (b - x);
    let t2 = 3.0 * weight / 64.0 * bracket2;

    Ok(match variant {
        SignVariant::Paper => p2 - t1 - t2,
        SignVariant::Validated => p2 + t1 - t2,
    })
}

/// Grid sweep comparing f with Π and Π* against all four bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub grid: Vec<f64>,
    pub values_p2: Vec<f64>,
    pub values_corrected: Vec<f64>,
    pub max_err_p2: f64,
    pub max_err_corrected: f64,
    pub bound_sup: f64,
    pub bound_osc: f64,
    pub bound_corrected: f64,
    /// Absent when f'''' is not bounded on the interval.
    pub bound_cubic: Option<f64>,
    pub satisfied_p2: bool,
    pub satisfied_corrected: bool,
}

/// Slack used by [`interp_report`]: `1e-12 + 1e-9 · bound`.
pub fn report_tolerance(bound: f64) -> f64 {
    1e-12 + 1e-9 * bound.abs()
}

pub fn interp_report(
    h: &FunctionHandle,
    iv: &Interval,
    bounds: &DerivativeBounds,
    grid_size: usize,
) -> Result<InterpolationReport> {
    if grid_size < 3 {
        return Err(Error::InvalidArgument(format!(
            "interpolation grid needs at least 3 points, got {grid_size}"
        )));
    }
    let (bound_sup, bound_osc) = p2_error_bounds(bounds, iv)?;
    let bound_corrected = corrected_bound(bounds, iv)?;
    let bound_cubic = cubic_lagrange_bound(bounds, iv).ok();

    let (fa, fb, fc) = (h.value(iv.a())?, h.value(iv.b())?, h.value(iv.c())?);
    let grid = iv.grid(grid_size);
    let mut values_p2 = Vec::with_capacity(grid_size);
    let mut values_corrected = Vec::with_capacity(grid_size);
    let mut max_err_p2: f64 = 0.0;
    let mut max_err_corrected: f64 = 0.0;
    for &x in &grid {
        let fx = h.value(x)?;
        let p = p2_interpolate(fa, fb, fc, iv, x)?;
        let q = corrected_interpolant(h, iv, x)?;
        max_err_p2 = max_err_p2.max((fx - p).abs());
        max_err_corrected = max_err_corrected.max((fx - q).abs());
        values_p2.push(p);
        values_corrected.push(q);
    }

    Ok(InterpolationReport {
        satisfied_p2: max_err_p2 <= bound_osc + report_tolerance(bound_osc),
        satisfied_corrected: max_err_corrected
            <= bound_corrected + report_tolerance(bound_corrected),
        grid,
        values_p2,
        values_corrected,
        max_err_p2,
        max_err_corrected,
        bound_sup,
        bound_osc,
        bound_corrected,
        bound_cubic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn handle(spec: &str) -> FunctionHandle {
        FunctionHandle::parse(spec).unwrap()
    }

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    fn bounds(spec: &str, v: &Interval) -> DerivativeBounds {
        DerivativeBounds::estimate(&handle(spec), v, 65).unwrap()
    }

    #[test]
    fn p2_examples() {
        let v = iv(0.0, 1.0);
        assert_eq!(p2_interpolate(1.0, 2.0, 3.0, &v, 0.0).unwrap(), 1.0);
        assert_eq!(p2_interpolate(1.0, 2.0, 3.0, &v, 1.0).unwrap(), 2.0);
        assert_eq!(p2_interpolate(1.0, 2.0, 3.0, &v, 0.5).unwrap(), 3.0);
        assert_abs_diff_eq!(
            p2_interpolate(0.0, 1.0, 0.25, &v, 0.3).unwrap(),
            0.09,
            epsilon = 1e-16
        );
        let l = p2_interpolate(0.0, 2f64.ln(), 1.5f64.ln(), &v, 0.25).unwrap();
        assert_abs_diff_eq!(l, 0.75 * 1.5f64.ln() - 0.125 * 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(l, 0.217_455_5, epsilon = 1e-7);
        assert!(matches!(
            p2_interpolate(0.0, 1.0, 0.5, &v, 1.5),
            Err(Error::OutsideInterval { .. })
        ));
    }

    #[test]
    fn bound_examples() {
        let v = iv(0.0, 1.0);
        let b = bounds("log1p", &v);
        let (sup, osc) = p2_error_bounds(&b, &v).unwrap();
        assert_abs_diff_eq!(sup, 2.0 / (72.0 * 3f64.sqrt()), epsilon = 1e-16);
        assert_abs_diff_eq!(sup, 0.016_037_5, epsilon = 1e-7);
        assert_abs_diff_eq!(osc, 0.030_070_3, epsilon = 1e-7);
        assert_abs_diff_eq!(
            corrected_bound(&b, &v).unwrap(),
            0.001_409_5,
            epsilon = 1e-7
        );
        assert_abs_diff_eq!(
            cubic_lagrange_bound(&b, &v).unwrap(),
            6.0 / 1296.0,
            epsilon = 1e-16
        );
        assert_abs_diff_eq!(
            corrected_bound(&b, &v).unwrap() / osc,
            3.0 / 64.0,
            epsilon = 1e-15
        );

        let flat = bounds("cubic:c2=1,c1=3", &iv(-2.0, 3.0));
        assert_eq!(p2_error_bounds(&flat, &v).unwrap(), (0.0, 0.0));
        assert_eq!(corrected_bound(&flat, &v).unwrap(), 0.0);
        let cube = bounds("cubic:c3=1", &v);
        assert_eq!(cubic_lagrange_bound(&cube, &v).unwrap(), 0.0);
        assert!(matches!(
            cubic_lagrange_bound(&bounds("pow:p=3.5,a0=-1", &iv(-1.0, 1.0)), &v),
            Err(Error::MissingBound(_))
        ));
    }

    #[test]
    fn corrected_interpolant_examples() {
        let cube = handle("cubic:c3=1");
        let v = iv(-1.0, 1.0);
        for x in [-1.0, 0.0, 1.0] {
            for variant in [SignVariant::Paper, SignVariant::Validated] {
                assert_eq!(
                    corrected_interpolant_with(&cube, &v, x, variant).unwrap(),
                    x * x * x
                );
            }
        }
        let b = bounds("cubic:c3=1", &v);
        let bound = corrected_bound(&b, &v).unwrap();
        assert_abs_diff_eq!(bound, 6.0 * 8.0 / (1536.0 * 3f64.sqrt()), epsilon = 1e-15);
        let q = corrected_interpolant(&cube, &v, 0.5).unwrap();
        assert!((0.125 - q).abs() <= bound);
        // the formula as printed: regression value, violates the bound
        let printed = corrected_interpolant_with(&cube, &v, 0.5, SignVariant::Paper).unwrap();
        assert_abs_diff_eq!(printed, 0.974_609_375, epsilon = 1e-15);
        assert!((0.125 - printed).abs() > bound);

        let log1p = handle("log1p");
        let u = iv(0.0, 1.0);
        let q = corrected_interpolant(&log1p, &u, 0.25).unwrap();
        let bound = corrected_bound(&bounds("log1p", &u), &u).unwrap();
        assert!((1.25f64.ln() - q).abs() <= bound);
        assert!(corrected_interpolant(&log1p, &u, -0.1).is_err());
    }

    #[test]
    fn node_reproduction() {
        for (spec, a, b) in [
            ("log1p", 0.0, 1.0),
            ("exp", -1.0, 1.0),
            ("sin", 0.0, 1.5),
            ("runge", -1.0, 1.0),
        ] {
            let f = handle(spec);
            let v = iv(a, b);
            for x in [v.a(), v.c(), v.b()] {
                let fx = f.value(x).unwrap();
                let tol = 1e-13 * fx.abs().max(1.0);
                let p = p2_interpolate(
                    f.value(a).unwrap(),
                    f.value(b).unwrap(),
                    f.value(v.c()).unwrap(),
                    &v,
                    x,
                );
                assert!((p.unwrap() - fx).abs() <= tol);
                assert!((corrected_interpolant(&f, &v, x).unwrap() - fx).abs() <= tol);
            }
        }
    }

    #[test]
    fn quadratic_reproduction() {
        for spec in [
            "cubic:c2=2,c1=-1,c0=0.5",
            "cubic:c1=3,c0=-2",
            "cubic:c0=7",
            "pow:p=2,a0=0.3",
        ] {
            let f = handle(spec);
            let v = iv(-1.5, 2.0);
            let b = bounds(spec, &v);
            let r = interp_report(&f, &v, &b, 201).unwrap();
            let scale = r
                .grid
                .iter()
                .map(|&x| f.value(x).unwrap().abs())
                .fold(1.0, f64::max);
            assert!(r.max_err_p2 <= 1e-13 * scale, "{spec}: {}", r.max_err_p2);
            assert!(
                r.max_err_corrected <= 1e-13 * scale,
                "{spec}: {}",
                r.max_err_corrected
            );
            assert!(r.satisfied_p2 && r.satisfied_corrected);
            for variant in [SignVariant::Paper, SignVariant::Validated] {
                let q = corrected_interpolant_with(&f, &v, 0.7, variant).unwrap();
                assert!((q - f.value(0.7).unwrap()).abs() <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn report_examples() {
        let v = iv(0.0, 1.0);
        let r = interp_report(&handle("log1p"), &v, &bounds("log1p", &v), 1001).unwrap();
        assert_eq!(r.grid.len(), 1001);
        assert!(r.satisfied_p2 && r.satisfied_corrected);
        assert!(r.max_err_corrected < r.max_err_p2);

        let w = iv(-1.0, 1.0);
        let pb = bounds("pow:p=3.5,a0=-1", &w);
        let third = pb.third().unwrap();
        assert_eq!(third.lo, 0.0);
        assert_abs_diff_eq!(third.hi, 13.125 * 2f64.sqrt(), epsilon = 1e-12);
        let r = interp_report(&handle("pow:p=3.5,a0=-1"), &w, &pb, 1001).unwrap();
        assert!(r.satisfied_p2 && r.satisfied_corrected);
        assert!(r.bound_cubic.is_none());

        assert!(interp_report(&handle("exp"), &v, &bounds("exp", &v), 2).is_err());
    }

    #[test]
    fn report_max_errors_follow_values() {
        let v = iv(-1.0, 1.0);
        let f = handle("exp");
        let r = interp_report(&f, &v, &bounds("exp", &v), 101).unwrap();
        let recomputed = r
            .grid
            .iter()
            .zip(&r.values_corrected)
            .map(|(&x, q)| (f.value(x).unwrap() - q).abs())
            .fold(0.0, f64::max);
        assert_eq!(recomputed, r.max_err_corrected);
    }

    #[test]
    fn cubic_weight_peak() {
        // max over [a,b] of (x-a)(b-x)|x-c| = (b-a)³/(12√3)
        for (a, b) in [(0.0, 1.0), (-2.0, 3.0), (10.0, 10.5)] {
            let v = iv(a, b);
            let peak = v
                .grid(100_001)
                .into_iter()
                .map(|x| (x - a) * (b - x) * (x - v.c()).abs())
                .fold(0.0, f64::max);
            let exact = (b - a).powi(3) / (12.0 * 3f64.sqrt());
            assert!((peak - exact).abs() <= 1e-9 * exact, "{peak} vs {exact}");
            assert!(peak <= exact * (1.0 + 1e-15));
        }
    }

    #[test]
    fn paper_constant_ratio_over_cubic_lagrange() {
        let ratio = 1536.0 * 3f64.sqrt() / 1296.0;
        assert!((ratio - 2.053).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn corrected_bound_is_tighter(m3 in -10.0f64..10.0, spread in 1e-6f64..10.0, a in -5.0f64..5.0, w in 0.01f64..5.0) {
            let big_m3 = m3 + spread;
            prop_assume!(2.0 * big_m3 - m3 > 0.0);
            let b = DerivativeBounds::default().with_third(m3, big_m3).unwrap();
            let v = iv(a, a + w);
            let (_, osc) = p2_error_bounds(&b, &v).unwrap();
            prop_assert!(corrected_bound(&b, &v).unwrap() < osc);
        }
    }
}
