//! Derivative ranges for the catalog functions, analytic where known and
//! sampled (with padding) otherwise.

use taylor_sharp::funcspace::estimate_lipschitz;
use taylor_sharp::{DerivativeBounds, FunctionHandle, Interval};

fn main() -> taylor_sharp::Result<()> {
    let cases = [
        ("log1p", 0.0, 1.0),
        ("exp", -1.0, 1.0),
        ("sin", 0.0, 7.0),
        ("runge", -1.0, 1.0),
        ("cubic:c3=2,c1=-1", -3.0, 2.0),
        ("pow:p=3.5,a0=-1", -1.0, 1.0),
    ];
    for (spec, a, b) in cases {
        let f = FunctionHandle::parse(spec)?;
        let iv = Interval::new(a, b)?;
        let db = DerivativeBounds::estimate(&f, &iv, 257)?;
        let (l, lp) = estimate_lipschitz(&f, &iv, 257)?;
        println!("{} on {iv} ({:?})", f.spec_string(), db.provenance);
        for (k, r) in [(2, db.second), (3, db.third), (4, db.fourth)] {
            match r {
                Some(r) => println!("  f^({k}) in [{:.6}, {:.6}]", r.lo, r.hi),
                None => println!("  f^({k}) unbounded"),
            }
        }
        println!("  Lipschitz(f''') ~ {l:.6} ({lp:?})");
    }
    Ok(())
}
