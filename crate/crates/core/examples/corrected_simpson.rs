//! Sign resolution of the corrected Simpson rule, then the rule against
//! Simpson and Cheng–Sun on a few intervals.

use taylor_sharp::quadrature::{
    cheng_sun, corrected_simpson, reference_integral, resolve_sign_pattern, simpson, Mode,
};
use taylor_sharp::{FunctionHandle, Interval, SignVariant};

fn main() -> taylor_sharp::Result<()> {
    let res = resolve_sign_pattern();
    println!(
        "moment check: {:.17} (expected {:.17})",
        res.moment,
        -1.0 / 120.0
    );
    for c in &res.candidates {
        println!(
            "  {:?}/{:?}: cubic err {:.1e} exact {} quartic err {:.3e}",
            c.pattern.first, c.pattern.second, c.cubic_error, c.cubic_exact, c.quartic_error
        );
    }
    println!(
        "selected {:?}/{:?} (tie broken: {})",
        res.pattern.first, res.pattern.second, res.tie_broken
    );

    let cube = FunctionHandle::parse("cubic:c3=1")?;
    let unit = Interval::new(0.0, 1.0)?;
    println!(
        "x^3 on [0,1]: printed {} (157/640 = {}), validated {}",
        corrected_simpson(&cube, &unit, Mode::Literal, SignVariant::Paper)?,
        157.0 / 640.0,
        corrected_simpson(&cube, &unit, Mode::Literal, SignVariant::Validated)?
    );

    for (spec, a, b) in [
        ("exp", -1.0, 1.0),
        ("sin", -0.4, 2.0),
        ("log1p:s=2", -1.5, 1.0),
    ] {
        let f = FunctionHandle::parse(spec)?;
        let iv = Interval::new(a, b)?;
        let exact = reference_integral(&f, &iv, 1e-13)?;
        println!("{spec} on {iv}");
        println!(
            "  simpson            {:.3e}",
            (simpson(&f, &iv)? - exact).abs()
        );
        println!(
            "  cheng_sun          {:.3e}",
            (cheng_sun(&f, &iv)? - exact).abs()
        );
        for mode in [Mode::Shifted, Mode::Literal] {
            let e = (corrected_simpson(&f, &iv, mode, SignVariant::Validated)? - exact).abs();
            println!("  corrected {:<8} {e:.3e}", mode.as_str());
        }
    }
    Ok(())
}
