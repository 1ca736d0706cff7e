//! Composite rules on doubling panel counts and their fitted convergence order.

use taylor_sharp::{composite_sweep, FunctionHandle, Interval, Rule, RuleOptions};

fn main() -> taylor_sharp::Result<()> {
    let f = FunctionHandle::parse("exp")?;
    let iv = Interval::new(0.0, 1.0)?;
    let panels = [1, 2, 4, 8, 16, 32];
    for rule in [Rule::Simpson, Rule::CorrectedSimpson, Rule::ChengSun] {
        let s = composite_sweep(&f, &iv, rule, &panels, RuleOptions::default())?;
        println!("{}", rule.as_str());
        for r in &s.reports {
            println!(
                "  {:>3} panels  error {:.3e}  bound {:.3e}",
                r.panels, r.abs_error, r.bound
            );
        }
        match s.empirical_order {
            Some(p) => println!("  order {p:.3}"),
            None => println!("  exact to round-off"),
        }
    }
    Ok(())
}
