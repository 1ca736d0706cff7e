//! ln 2 from the derivative of ln(1 + x) on [0, 1]: classical vs sharpened expansions.

use taylor_sharp::{
    expand_classical, expand_first_order, expand_second_order, DerivativeBounds, FunctionHandle,
    Interval, Variant,
};

fn main() -> taylor_sharp::Result<()> {
    let f = FunctionHandle::parse("log1p")?;
    let iv = Interval::new(0.0, 1.0)?;
    let bounds = DerivativeBounds::estimate(&f, &iv, 129)?;

    let classical = expand_classical(&f, &iv, &bounds)?;
    println!(
        "{:<18} {:>3} {:>20} {:>12} {:>26}",
        "rule", "n", "estimate", "error", "envelope"
    );
    let show = |r: &taylor_sharp::ExpansionReport| {
        println!(
            "{:<18} {:>3} {:>20.16} {:>12.3e} [{:>11.3e}, {:>11.3e}]",
            r.kind.rule_name(),
            r.n,
            r.estimate,
            r.actual_error,
            r.remainder_lo,
            r.remainder_hi
        );
    };
    show(&classical);
    for n in [1, 2, 4, 8] {
        show(&expand_first_order(&f, &iv, n, &bounds)?);
        let r = expand_second_order(&f, &iv, n, &bounds, Variant::Closure)?;
        show(&r);
        show(&expand_second_order(&f, &iv, n, &bounds, Variant::Open)?);
        println!(
            "    half-width ratio classical/closure: {:.4}",
            classical.half_width() / r.half_width()
        );
    }
    println!("1061/1536 = {:.16}", 1061.0 / 1536.0);
    Ok(())
}
