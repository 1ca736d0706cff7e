//! P2 interpolation against the corrected interpolant on the test battery.

use std::f64::consts::FRAC_PI_2;

use taylor_sharp::{interp_report, DerivativeBounds, FunctionHandle, Interval};

fn main() -> taylor_sharp::Result<()> {
    for (spec, a, b) in [
        ("log1p", 0.0, 1.0),
        ("exp", -1.0, 1.0),
        ("sin", 0.0, FRAC_PI_2),
        ("pow:p=3.5,a0=-1", -1.0, 1.0),
    ] {
        let f = FunctionHandle::parse(spec)?;
        let iv = Interval::new(a, b)?;
        let db = DerivativeBounds::estimate(&f, &iv, 257)?;
        let r = interp_report(&f, &iv, &db, 1001)?;
        println!("{}", f.spec_string());
        println!(
            "  P2      max err {:.3e}  bound {:.3e}  ok {}",
            r.max_err_p2, r.bound_osc, r.satisfied_p2
        );
        println!(
            "  P2*     max err {:.3e}  bound {:.3e}  ok {}",
            r.max_err_corrected, r.bound_corrected, r.satisfied_corrected
        );
        if let Some(c) = r.bound_cubic {
            println!("  cubic Lagrange bound {c:.3e}");
        }
    }
    println!("1536*sqrt(3)/1296 = {:.4}", 1536.0 * 3f64.sqrt() / 1296.0);
    Ok(())
}
