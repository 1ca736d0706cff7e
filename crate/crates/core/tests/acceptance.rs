//! One PASS/FAIL line per acceptance criterion; exits non-zero on any failure.

use std::f64::consts::{FRAC_PI_2, LN_2};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taylor_sharp::cli::random_straddling_interval;
use taylor_sharp::expansion::{
    classical_symmetric_bound, envelope_second_order, expand_classical, expand_first_order,
    expand_second_order, weights, Variant,
};
use taylor_sharp::interpolation::{
    corrected_bound, corrected_interpolant, p2_error_bounds, p2_interpolate,
};
use taylor_sharp::quadrature::{
    cheng_sun, corrected_simpson, power_surrogate_bound, quad_bound, reference_integral,
    resolve_sign_pattern, simpson, BoundId, Mode, SecondCorrection, EXACTNESS_TOL,
};
use taylor_sharp::{DerivativeBounds, FunctionHandle, Interval, SignVariant};

const TOL: f64 = 1e-12;
const GRID: usize = 257;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn battery() -> Vec<(FunctionHandle, Interval)> {
    [
        ("log1p", 0.0, 1.0),
        ("exp", -1.0, 1.0),
        ("sin", 0.0, FRAC_PI_2),
        ("pow:p=3.5,a0=-1", -1.0, 1.0),
    ]
    .iter()
    .map(|&(s, a, b)| {
        (
            FunctionHandle::parse(s).unwrap(),
            Interval::new(a, b).unwrap(),
        )
    })
    .collect()
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ln2_reproduction() -> Outcome {
    let f = FunctionHandle::parse("log1p").map_err(err)?;
    let iv = Interval::new(0.0, 1.0).map_err(err)?;
    let bounds = DerivativeBounds::estimate(&f, &iv, GRID).map_err(err)?;
    let r = expand_second_order(&f, &iv, 2, &bounds, Variant::Closure).map_err(err)?;
    check(
        (r.estimate - 1061.0 / 1536.0).abs() <= 1e-13,
        format!("estimate {}", r.estimate),
    )?;
    check(
        (r.remainder_hi - 15.0 / 1536.0).abs() <= 1e-15,
        format!("remainder_hi {}", r.remainder_hi),
    )?;
    check(r.contains(TOL), "second-order error outside envelope")?;
    let c = expand_classical(&f, &iv, &bounds).map_err(err)?;
    check(
        c.estimate == 0.5,
        format!("classical estimate {}", c.estimate),
    )?;
    let sym = classical_symmetric_bound(&bounds, &iv).map_err(err)?;
    check(
        (sym - 1.0 / 3.0).abs() <= 1e-15,
        format!("symmetric bound {sym}"),
    )?;
    check(
        c.contains(TOL) && c.actual_error.abs() <= sym,
        "classical error outside envelope",
    )?;
    Ok(format!(
        "estimate {:.16} error {:.6e} in [{:.6e}, {:.6e}]",
        r.estimate, r.actual_error, r.remainder_lo, r.remainder_hi
    ))
}

fn weight_scheme() -> Outcome {
    for n in 1..=16usize {
        let w = weights(n, Variant::Closure).map_err(err)?;
        let expected = 3.0 / (32.0 * (n * n) as f64);
        check(
            (w.omega0 - expected).abs() <= 1e-16 * expected,
            format!("omega0 at n={n}"),
        )?;
        check(
            (w.omega_n + w.omega0).abs() <= 1e-16 * expected,
            format!("omega_n at n={n}"),
        )?;
        check(w.sum() == 0.0, format!("closure sum {} at n={n}", w.sum()))?;
    }
    Ok("n = 1..16".into())
}

fn constant_third_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-3.0..=3.0));
        let a: f64 = rng.gen_range(-2.0..=2.0);
        let iv = Interval::new(a, a + rng.gen_range(0.1..=2.0)).map_err(err)?;
        let spec = format!("cubic:c3={},c2={},c1={},c0={}", c[0], c[1], c[2], c[3]);
        let f = FunctionHandle::parse(&spec).map_err(err)?;
        let bounds = DerivativeBounds::estimate(&f, &iv, GRID).map_err(err)?;
        for n in [1usize, 2, 4, 8] {
            let r = expand_second_order(&f, &iv, n, &bounds, Variant::Closure).map_err(err)?;
            let predicted = iv.width().powi(3) * 6.0 * c[0] / (96.0 * (n * n) as f64);
            let dev = (r.truth - r.estimate - predicted).abs() / r.truth.abs().max(1.0);
            worst = worst.max(dev);
            check(
                dev <= 1e-10,
                format!("{spec} on {iv}, n={n}: deviation {dev:e}"),
            )?;
        }
    }
    Ok(format!("200 cases, worst scaled deviation {worst:.2e}"))
}

fn envelope_containment() -> Outcome {
    let mut cases = 0;
    for (f, iv) in battery() {
        let bounds = DerivativeBounds::estimate(&f, &iv, GRID).map_err(err)?;
        let c = expand_classical(&f, &iv, &bounds).map_err(err)?;
        check(
            c.contains(TOL),
            format!("classical {} on {iv}", f.spec_string()),
        )?;
        cases += 1;
        for n in 1..=8 {
            for r in [
                expand_second_order(&f, &iv, n, &bounds, Variant::Closure).map_err(err)?,
                expand_second_order(&f, &iv, n, &bounds, Variant::Open).map_err(err)?,
                expand_first_order(&f, &iv, n, &bounds).map_err(err)?,
            ] {
                check(
                    r.contains(TOL),
                    format!(
                        "{} {} n={n}: {} not in [{}, {}]",
                        f.spec_string(),
                        r.kind.rule_name(),
                        r.actual_error,
                        r.remainder_lo,
                        r.remainder_hi
                    ),
                )?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases}/{cases} inside"))
}

fn remainder_ratio() -> Outcome {
    let unit = Interval::new(0.0, 1.0).map_err(err)?;
    let bounds = DerivativeBounds::default()
        .with_third(-1.0, 1.0)
        .map_err(err)?;
    let classical = classical_symmetric_bound(&bounds, &unit).map_err(err)?;
    let mut first = 0.0;
    for n in 1..=8usize {
        let (lo, hi) = envelope_second_order(&bounds, &unit, n, Variant::Closure).map_err(err)?;
        let ratio = classical / (0.5 * (hi - lo));
        let expected = 16.0 * (n * n) as f64 / 3.0;
        check(
            (ratio - expected).abs() <= 1e-12 * expected,
            format!("n={n}: ratio {ratio}"),
        )?;
        if n == 1 {
            first = ratio;
        }
    }
    Ok(format!("n=1 ratio {first:.12}"))
}

fn interpolation_bounds() -> Outcome {
    let mut worst: f64 = 0.0;
    for (f, iv) in battery() {
        let bounds = DerivativeBounds::estimate(&f, &iv, GRID).map_err(err)?;
        let (_, osc) = p2_error_bounds(&bounds, &iv).map_err(err)?;
        let corr = corrected_bound(&bounds, &iv).map_err(err)?;
        let (fa, fb, fc) = (
            f.value(iv.a()).map_err(err)?,
            f.value(iv.b()).map_err(err)?,
            f.value(iv.c()).map_err(err)?,
        );
        let (mut e_p2, mut e_star): (f64, f64) = (0.0, 0.0);
        for x in iv.grid(1001) {
            let fx = f.value(x).map_err(err)?;
            e_p2 = e_p2.max((fx - p2_interpolate(fa, fb, fc, &iv, x).map_err(err)?).abs());
            e_star = e_star.max((fx - corrected_interpolant(&f, &iv, x).map_err(err)?).abs());
        }
        check(
            e_p2 <= osc + TOL,
            format!("{} P2 {e_p2} > {osc}", f.spec_string()),
        )?;
        check(
            e_star <= corr + TOL,
            format!("{} corrected {e_star} > {corr}", f.spec_string()),
        )?;
        worst = worst.max(e_star / corr);
    }
    let ratio = 1536.0 * 3f64.sqrt() / 1296.0;
    check(
        (ratio - 2.053).abs() <= 1e-3,
        format!("constant ratio {ratio}"),
    )?;
    Ok(format!(
        "corrected error/bound <= {worst:.3}; 1536*sqrt(3)/1296 = {ratio:.4}"
    ))
}

fn simpson_bounds() -> Outcome {
    let quartic = FunctionHandle::parse("pow:p=4,a0=0").map_err(err)?;
    let unit = Interval::new(0.0, 1.0).map_err(err)?;
    let qb = DerivativeBounds::estimate(&quartic, &unit, GRID).map_err(err)?;
    let c4 = quad_bound(BoundId::C4, &unit, &qb).map_err(err)?;
    let oracle = reference_integral(&quartic, &unit, 1e-13).map_err(err)?;
    let e = (simpson(&quartic, &unit).map_err(err)? - oracle).abs();
    check((c4 - 1.0 / 120.0).abs() <= 1e-14, format!("c4 bound {c4}"))?;
    check(
        (e - c4).abs() <= 1e-14,
        format!("x^4 error {e} vs bound {c4}"),
    )?;
    for (f, iv) in battery() {
        let bounds = DerivativeBounds::estimate(&f, &iv, GRID).map_err(err)?;
        let sup = quad_bound(BoundId::C3Sup, &iv, &bounds).map_err(err)?;
        let osc = quad_bound(BoundId::C3Osc, &iv, &bounds).map_err(err)?;
        let oracle =
            reference_integral(&f, &iv, (sup.min(osc) / 100.0).clamp(1e-13, 1e-10)).map_err(err)?;
        let e = (simpson(&f, &iv).map_err(err)? - oracle).abs();
        check(
            e <= sup + TOL && e <= osc + TOL,
            format!("{}: {e} vs {sup}, {osc}", f.spec_string()),
        )?;
    }
    Ok(format!("x^4 error {e:.17} = c4 bound"))
}

fn corrected_quadrature() -> Outcome {
    let res = resolve_sign_pattern();
    check(
        (res.moment + 1.0 / 120.0).abs() <= 1e-16,
        format!("moment {}", res.moment),
    )?;
    let chosen = res
        .candidates
        .iter()
        .find(|c| c.pattern == res.pattern)
        .ok_or("selected pattern missing from candidates")?;
    check(
        chosen.cubic_exact && chosen.cubic_error <= EXACTNESS_TOL,
        "selected pattern not cubic-exact",
    )?;
    check(
        res.pattern.second == SecondCorrection::Derived,
        "second correction not the derived form",
    )?;

    let cube = FunctionHandle::parse("cubic:c3=1").map_err(err)?;
    let unit = Interval::new(0.0, 1.0).map_err(err)?;
    let printed =
        corrected_simpson(&cube, &unit, Mode::Literal, SignVariant::Paper).map_err(err)?;
    check(
        (printed - 157.0 / 640.0).abs() <= 1e-15,
        format!("printed rule on x^3: {printed}"),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for spec in ["exp", "sin", "log1p:s=2"] {
        let f = FunctionHandle::parse(spec).map_err(err)?;
        for _ in 0..20 {
            let iv = random_straddling_interval(&mut rng);
            let bounds = DerivativeBounds::estimate(&f, &iv, GRID).map_err(err)?;
            for mode in [Mode::Shifted, Mode::Literal] {
                let bound_iv = if mode == Mode::Shifted {
                    iv.centered()
                } else {
                    iv
                };
                let bound = quad_bound(BoundId::LipschitzBis, &bound_iv, &bounds).map_err(err)?;
                let oracle = reference_integral(&f, &iv, (bound / 100.0).clamp(1e-13, 1e-10))
                    .map_err(err)?;
                let e = (corrected_simpson(&f, &iv, mode, SignVariant::Validated).map_err(err)?
                    - oracle)
                    .abs();
                check(
                    e <= bound + TOL,
                    format!("{spec} on {iv} ({mode:?}): {e} > {bound}"),
                )?;
                worst = worst.max(e / bound);
                cases += 1;
            }
        }
    }

    for (f, iv) in battery() {
        let bounds = DerivativeBounds::estimate(&f, &iv, GRID).map_err(err)?;
        let bound = quad_bound(BoundId::ChengSun, &iv, &bounds).map_err(err)?;
        let oracle =
            reference_integral(&f, &iv, (bound / 100.0).clamp(1e-13, 1e-10)).map_err(err)?;
        let e = (cheng_sun(&f, &iv).map_err(err)? - oracle).abs();
        check(
            e <= bound + TOL,
            format!("Cheng-Sun {}: {e} > {bound}", f.spec_string()),
        )?;
    }
    let unit = Interval::new(-0.5, 0.5).map_err(err)?;
    let osc = DerivativeBounds::default()
        .with_third(0.0, 1.0)
        .map_err(err)?;
    let lip = DerivativeBounds::default()
        .with_third(0.0, 0.0)
        .and_then(|b| b.with_lipschitz(1.0))
        .map_err(err)?;
    let ratio = quad_bound(BoundId::ChengSun, &unit, &osc).map_err(err)?
        / quad_bound(BoundId::LipschitzBis, &unit, &lip).map_err(err)?;
    check(
        (ratio - 4.0 / 3.0).abs() <= 1e-15,
        format!("512/384 constant ratio {ratio}"),
    )?;
    Ok(format!(
        "{} cubic-exact patterns, quartic tie-break -> {:?}/{:?}; {cases} random cases, worst error/bound {worst:.3}",
        res.cubic_exact_count, res.pattern.first, res.pattern.second
    ))
}

fn c3_only_family() -> Outcome {
    let iv = Interval::new(-1.0, 1.0).map_err(err)?;
    let mut detail = Vec::new();
    for p in [3.25, 3.5, 3.75] {
        let f = FunctionHandle::parse(&format!("pow:p={p},a0=-1")).map_err(err)?;
        let k = p * (p - 1.0) * (p - 2.0);
        let m3 = k * 2f64.powf(p - 3.0);
        let stated = 0.75f64.powf(p - 3.0) * k * 2f64.powf(p + 1.0) / 384.0
            + 5.0 * 16.0 * (2.0 * m3) / 36864.0;
        let bound = power_surrogate_bound(p, &iv).map_err(err)?;
        check(
            (bound - stated).abs() <= 1e-14 * stated,
            format!("p={p}: surrogate {bound} vs {stated}"),
        )?;
        let oracle = reference_integral(&f, &iv, 1e-12).map_err(err)?;
        let e = (corrected_simpson(&f, &iv, Mode::Shifted, SignVariant::Validated).map_err(err)?
            - oracle)
            .abs();
        check(e <= bound, format!("p={p}: {e} > {bound}"))?;
        let constant = 0.75f64.powf(p - 3.0) / 384.0;
        check(
            1.0 / 3686.0 < 1.0 / 512.0 && 1.0 / 512.0 <= constant,
            format!("p={p}: constant ordering"),
        )?;
        detail.push(format!("p={p}: {e:.2e} <= {bound:.3}"));
    }
    Ok(detail.join("; "))
}

fn oracle_self_check() -> Outcome {
    let cases = [
        ("pow:p=4,a0=0", 0.0, 1.0, 0.2),
        ("log1p", 0.0, 1.0, 2.0 * LN_2 - 1.0),
        ("pow:p=3.5,a0=-1", -1.0, 1.0, 2f64.powf(4.5) / 4.5),
    ];
    let mut worst: f64 = 0.0;
    for (spec, a, b, exact) in cases {
        let f = FunctionHandle::parse(spec).map_err(err)?;
        let v = reference_integral(&f, &Interval::new(a, b).map_err(err)?, 1e-13).map_err(err)?;
        check(
            (v - exact).abs() <= 1e-11,
            format!("{spec}: {v} vs {exact}"),
        )?;
        worst = worst.max((v - exact).abs());
    }
    Ok(format!("worst deviation {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("ln(2) reproduction", ln2_reproduction),
        ("weight scheme", weight_scheme),
        ("constant-f''' oracle", constant_third_oracle),
        ("envelope containment battery", envelope_containment),
        ("remainder-ratio identity", remainder_ratio),
        ("interpolation bounds", interpolation_bounds),
        ("Simpson bounds", simpson_bounds),
        ("corrected quadrature", corrected_quadrature),
        ("C3-only family", c3_only_family),
        ("oracle self-check", oracle_self_check),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
