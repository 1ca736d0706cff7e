//! Simpson's rule, the corrected Simpson rule, the Cheng–Sun corrected
//! trapezoid, their error bounds, and an adaptive reference integrator.
//!
//! The corrected rule adds two f''-based terms to Simpson's rule:
//!
//! ```text
//! I(f) = S(f) ± (b-a)³/240 · [f''(a/2) - 2 f''(c/2) + f''(b/2)] + second correction
//! ```
//!
//! The sign of the first term and the form of the second are fixed by
//! [`resolve_sign_pattern`], which selects the pattern that integrates cubics
//! exactly. [`SignVariant::Paper`] keeps the printed pattern
//! `+ ... - (b-a)³/2560 · [f''(a) + 2 f''(c) + f''(b)]` for reference.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{DerivativeBounds, FunctionHandle, Interval};
use crate::sign::SignVariant;

/// Lower limit for the `tol` argument of [`reference_integral`].
pub const MIN_ORACLE_TOL: f64 = 1e-14;

/// Floor for the oracle tolerance derived from a bound.
pub const ORACLE_TOL_FLOOR: f64 = 1e-13;

/// Loosest oracle tolerance used for reports, so reported oracle values
/// stay accurate even when the bound is large.
pub const ORACLE_TOL_CAP: f64 = 1e-10;

const ORACLE_BUDGET: usize = 2_000_000;
const ORACLE_INITIAL_PANELS: usize = 16;

/// Slack used when comparing an observed error to its bound.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Simpson,
    CorrectedSimpson,
    ChengSun,
}

impl Rule {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rule::Simpson => "simpson",
            Rule::CorrectedSimpson => "corrected_simpson",
            Rule::ChengSun => "cheng_sun",
        }
    }

    /// Bound reported by default for this rule.
    pub fn default_bound(&self) -> BoundId {
        match self {
            Rule::Simpson => BoundId::C3Osc,
            Rule::CorrectedSimpson => BoundId::LipschitzBis,
            Rule::ChengSun => BoundId::ChengSun,
        }
    }
}

/// Where the corrected rule evaluates its half-point second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// f'' at the absolute points a/2, c/2, b/2 (may leave [a, b]).
    Literal,
    /// Apply the rule to g(t) = f(t + c) on [-(b-a)/2, (b-a)/2].
    #[default]
    Shifted,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Literal => "literal",
            Mode::Shifted => "shifted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    /// (b-a)⁵ sup|f⁽⁴⁾| / 2880
    C4,
    /// (b-a)⁴ sup|f'''| / 192
    C3Sup,
    /// 5 (b-a)⁴ (M₃ - m₃) / 1152
    C3Osc,
    /// L (b-a)³ (a² + ab + b²) / 512 + 5 (b-a)⁴ (2M₃ - m₃) / 36864
    Lipschitz,
    /// L (b-a)⁵ / 512 + 5 (b-a)⁴ (2M₃ - m₃) / 36864, for ab < 0
    LipschitzBis,
    /// (b-a)⁴ (M₃ - m₃) / 384
    ChengSun,
    /// C³-only surrogate for (x - a)^p, 3 <= p < 4; see [`power_surrogate_bound`].
    PowSurrogate,
}

impl BoundId {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundId::C4 => "c4",
            BoundId::C3Sup => "c3_sup",
            BoundId::C3Osc => "c3_osc",
            BoundId::Lipschitz => "lipschitz",
            BoundId::LipschitzBis => "lipschitz_bis",
            BoundId::ChengSun => "cheng_sun",
            BoundId::PowSurrogate => "pow_surrogate",
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sign of the half-point second-difference correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstSign {
    Plus,
    Minus,
}

/// Form of the endpoint/midpoint f'' correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondCorrection {
    /// -(b-a)³/2560 · [f''(a) + 2f''(c) + f''(b)]
    Printed,
    /// +(b-a)³/2560 · [2f''(c) - f''(a) - f''(b)]
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignPattern {
    pub first: FirstSign,
    pub second: SecondCorrection,
}

impl SignPattern {
    pub const PRINTED: SignPattern = SignPattern {
        first: FirstSign::Plus,
        second: SecondCorrection::Printed,
    };

    pub const ALL: [SignPattern; 4] = [
        SignPattern::PRINTED,
        SignPattern {
            first: FirstSign::Minus,
            second: SecondCorrection::Printed,
        },
        SignPattern {
            first: FirstSign::Plus,
            second: SecondCorrection::Derived,
        },
        SignPattern {
            first: FirstSign::Minus,
            second: SecondCorrection::Derived,
        },
    ];
}

/// Score of one candidate pattern in the sign-resolution procedure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub pattern: SignPattern,
    /// Max relative error over the cubic basis and the three test intervals.
    pub cubic_error: f64,
    pub cubic_exact: bool,
    /// Max of |error| / (b-a)⁵ for x⁴ over the same intervals.
    pub quartic_error: f64,
}

/// Outcome of [`resolve_sign_pattern`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignResolution {
    pub pattern: SignPattern,
    /// ∫₀¹ x²(1-x)(1/2-x) dx, expected -1/120.
    pub moment: f64,
    pub candidates: Vec<CandidateScore>,
    pub cubic_exact_count: usize,
    /// Whether the quartic tie-break was needed to single out `pattern`.
    pub tie_broken: bool,
}

/// Intervals on which the candidate patterns are tested.
pub const RESOLUTION_INTERVALS: [(f64, f64); 3] = [(0.0, 1.0), (-1.0, 1.0), (2.0, 5.0)];

/// Threshold for "exact" in the sign-resolution procedure.
pub const EXACTNESS_TOL: f64 = 1e-12;

/// Derivative `order` of x^k.
fn monomial(k: i32, order: u8, x: f64) -> f64 {
    let order = i32::from(order);
    if order > k {
        return 0.0;
    }
    let coef: f64 = (0..order).map(|j| f64::from(k - j)).product();
    coef * x.powi(k - order)
}

fn polynomial_product(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, pi) in p.iter().enumerate() {
        for (j, qj) in q.iter().enumerate() {
            out[i + j] += pi * qj;
        }
    }
    out
}

/// Enumerates the four sign patterns of the corrected rule and selects the
/// one that is exact on `{1, x, x², x³}` over [`RESOLUTION_INTERVALS`].
///
/// For cubics f'' is affine, so the half-point second difference vanishes
/// and both signs of the first correction pass; the tie is broken by the
/// smaller error on x⁴. The result is computed once and cached.
pub fn resolve_sign_pattern() -> &'static SignResolution {
    static RESOLUTION: OnceLock<SignResolution> = OnceLock::new();
    RESOLUTION.get_or_init(|| {
        // x²(1-x)(1/2-x), expanded in ascending powers
        let integrand = polynomial_product(
            &polynomial_product(&[0.0, 0.0, 1.0], &[1.0, -1.0]),
            &[0.5, -1.0],
        );
        let moment: f64 = integrand
            .iter()
            .enumerate()
            .map(|(k, c)| c / (k + 1) as f64)
            .sum();

        let candidates: Vec<CandidateScore> = SignPattern::ALL
            .iter()
            .map(|&pattern| {
                let mut cubic_error: f64 = 0.0;
                let mut quartic_error: f64 = 0.0;
                for (a, b) in RESOLUTION_INTERVALS {
                    for k in 0..=4 {
                        let eval = |x: f64, order: u8| Ok(monomial(k, order, x));
                        let value = corrected_formula(&eval, a, b, pattern)
                            .expect("monomials evaluate everywhere");
                        let exact = (b.powi(k + 1) - a.powi(k + 1)) / f64::from(k + 1);
                        if k < 4 {
                            cubic_error =
                                cubic_error.max((value - exact).abs() / exact.abs().max(1.0));
                        } else {
                            quartic_error =
                                quartic_error.max((value - exact).abs() / (b - a).powi(5));
                        }
                    }
                }
                CandidateScore {
                    pattern,
                    cubic_error,
                    cubic_exact: cubic_error <= EXACTNESS_TOL,
                    quartic_error,
                }
            })
            .collect();

        let exact: Vec<&CandidateScore> = candidates.iter().filter(|c| c.cubic_exact).collect();
        let best = exact
            .iter()
            .min_by(|x, y| x.quartic_error.total_cmp(&y.quartic_error))
            .expect("at least one sign pattern integrates cubics exactly");
        SignResolution {
            pattern: best.pattern,
            moment,
            cubic_exact_count: exact.len(),
            tie_broken: exact.len() > 1,
            candidates,
        }
    })
}

/// Sign pattern used for a [`SignVariant`].
pub fn pattern_for(variant: SignVariant) -> SignPattern {
    match variant {
        SignVariant::Paper => SignPattern::PRINTED,
        SignVariant::Validated => resolve_sign_pattern().pattern,
    }
}

/// The corrected rule on `[a, b]` for an arbitrary derivative evaluator,
/// with half-points taken literally as a/2, c/2, b/2.
pub fn corrected_formula(
    eval: &dyn Fn(f64, u8) -> Result<f64>,
    a: f64,
    b: f64,
    pattern: SignPattern,
) -> Result<f64> {
    let c = 0.5 * (a + b);
    let w = b - a;
    let w3 = w * w * w;
    let simpson = w / 6.0 * (eval(a, 0)? + 4.0 * eval(c, 0)? + eval(b, 0)?);

    let d2 = |x: f64| eval(x, 2);
    let second_difference = d2(0.5 * a)? - 2.0 * d2(0.5 * c)? + d2(0.5 * b)?;
    let first = match pattern.first {
        FirstSign::Plus => w3 / 240.0 * second_difference,
        FirstSign::Minus => -w3 / 240.0 * second_difference,
    };
    let (fa, fc, fb) = (d2(a)?, d2(c)?, d2(b)?);
    let second = match pattern.second {
        SecondCorrection::Printed => -w3 / 2560.0 * (fa + 2.0 * fc + fb),
        SecondCorrection::Derived => w3 / 2560.0 * (2.0 * fc - fa - fb),
    };
    Ok(simpson + first + second)
}

pub fn simpson(h: &FunctionHandle, iv: &Interval) -> Result<f64> {
    Ok(iv.width() / 6.0 * (h.value(iv.a())? + 4.0 * h.value(iv.c())? + h.value(iv.b())?))
}

pub fn corrected_simpson(
    h: &FunctionHandle,
    iv: &Interval,
    mode: Mode,
    sign_variant: SignVariant,
) -> Result<f64> {
    corrected_simpson_with_pattern(h, iv, mode, pattern_for(sign_variant))
}

pub fn corrected_simpson_with_pattern(
    h: &FunctionHandle,
    iv: &Interval,
    mode: Mode,
    pattern: SignPattern,
) -> Result<f64> {
    match mode {
        Mode::Literal => corrected_formula(&|x, k| h.eval(x, k), iv.a(), iv.b(), pattern),
        Mode::Shifted => {
            let centered = iv.centered();
            let shift = shifted_evaluator(h, iv);
            corrected_formula(&shift, centered.a(), centered.b(), pattern)
        }
    }
}

/// Evaluator of g(t) = f(t + c); abscissae are clamped to [a, b] so the
/// translated endpoints land exactly on the original ones.
pub fn shifted_evaluator<'a>(
    h: &'a FunctionHandle,
    iv: &'a Interval,
) -> impl Fn(f64, u8) -> Result<f64> + 'a {
    let c = iv.c();
    move |t, k| h.eval((c + t).clamp(iv.a(), iv.b()), k)
}

/// Trapezoid rule with the endpoint f' correction.
pub fn cheng_sun(h: &FunctionHandle, iv: &Interval) -> Result<f64> {
    let w = iv.width();
    let (a, b) = (iv.a(), iv.b());
    Ok(w / 2.0 * (h.value(a)? + h.value(b)?) - w * w / 12.0 * (h.eval(b, 1)? - h.eval(a, 1)?))
}

/// Applies `rule` once on `iv`.
pub fn apply_rule(
    h: &FunctionHandle,
    iv: &Interval,
    rule: Rule,
    mode: Mode,
    sign_variant: SignVariant,
) -> Result<f64> {
    match rule {
        Rule::Simpson => simpson(h, iv),
        Rule::CorrectedSimpson => corrected_simpson(h, iv, mode, sign_variant),
        Rule::ChengSun => cheng_sun(h, iv),
    }
}

/// Error bound `bound_id` on `iv`. `PowSurrogate` needs the exponent and is
/// computed by [`power_surrogate_bound`] instead.
pub fn quad_bound(bound_id: BoundId, iv: &Interval, bounds: &DerivativeBounds) -> Result<f64> {
    let w = iv.width();
    let w4 = w.powi(4);
    let epsilon_term = |b: &DerivativeBounds| -> Result<f64> {
        let third = b.third()?;
        Ok(5.0 * w4 * (2.0 * third.hi - third.lo) / 36864.0)
    };
    match bound_id {
        BoundId::C4 => Ok(w.powi(5) * bounds.fourth()?.abs_max() / 2880.0),
        BoundId::C3Sup => Ok(w4 * bounds.third()?.abs_max() / 192.0),
        BoundId::C3Osc => Ok(5.0 * w4 * bounds.third()?.oscillation() / 1152.0),
        BoundId::Lipschitz => {
            let (a, b) = (iv.a(), iv.b());
            let lipschitz = bounds.lipschitz()?;
            Ok(lipschitz * w.powi(3) * (a * a + a * b + b * b) / 512.0 + epsilon_term(bounds)?)
        }
        BoundId::LipschitzBis => {
            if iv.a() * iv.b() >= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "lipschitz_bis bound needs ab < 0, got {iv}"
                )));
            }
            Ok(bounds.lipschitz()? * w.powi(5) / 512.0 + epsilon_term(bounds)?)
        }
        BoundId::ChengSun => Ok(w4 * bounds.third()?.oscillation() / 384.0),
        BoundId::PowSurrogate => Err(Error::InvalidArgument(
            "pow_surrogate needs the exponent p; use power_surrogate_bound".into(),
        )),
    }
}

/// Bound for the corrected rule applied to `(x - a)^p`, `3 <= p < 4`, on
/// `[a, b]`, avoiding the (infinite) Lipschitz constant of f''':
///
/// `(3/4)^(p-3) p(p-1)(p-2) (b-a)^(p+1) / 384 + 5 (b-a)⁴ (2M₃ - m₃) / 36864`
/// with `m₃ = 0`, `M₃ = p(p-1)(p-2) (b-a)^(p-3)`.
pub fn power_surrogate_bound(p: f64, iv: &Interval) -> Result<f64> {
    if !(3.0..4.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "power surrogate bound needs 3 <= p < 4, got {p}"
        )));
    }
    let w = iv.width();
    let k = p * (p - 1.0) * (p - 2.0);
    let big_m3 = k * w.powf(p - 3.0);
    Ok(0.75f64.powf(p - 3.0) * k * w.powf(p + 1.0) / 384.0
        + 5.0 * w.powi(4) * 2.0 * big_m3 / 36864.0)
}

/// Bound for a report, dispatching `PowSurrogate` through the handle's parameters.
pub fn bound_for(
    h: &FunctionHandle,
    bound_id: BoundId,
    iv: &Interval,
    bounds: &DerivativeBounds,
) -> Result<f64> {
    if bound_id != BoundId::PowSurrogate {
        return quad_bound(bound_id, iv, bounds);
    }
    match (h.name(), h.param("p"), h.param("a0")) {
        ("pow", Some(p), Some(a0)) if a0 == iv.a() => power_surrogate_bound(p, iv),
        _ => Err(Error::InvalidArgument(format!(
            "pow_surrogate applies to pow:p=..,a0=a on [a, b], got {} on {iv}",
            h.spec_string()
        ))),
    }
}

/// Adaptive Simpson integration with Richardson-corrected panels.
///
/// A panel `[l, r]` is accepted once `|S(l,m) + S(m,r) - S(l,r)| <= 15 tol (r-l)/(b-a)`.
/// Panels are processed left to right from an explicit work list and
/// accumulated with compensated summation, so the result is deterministic.
pub fn reference_integral(h: &FunctionHandle, iv: &Interval, tol: f64) -> Result<f64> {
    if tol.is_nan() || tol < MIN_ORACLE_TOL {
        return Err(Error::InvalidArgument(format!(
            "oracle tolerance must be >= {MIN_ORACLE_TOL:e}, got {tol:e}"
        )));
    }
    struct Panel {
        l: f64,
        r: f64,
        fl: f64,
        fm: f64,
        fr: f64,
        whole: f64,
    }
    let f = |x: f64| h.value(x);
    let total = iv.width();
    let panel = |l: f64, r: f64, fl: f64, fr: f64| -> Result<Panel> {
        let fm = f(0.5 * (l + r))?;
        Ok(Panel {
            l,
            r,
            fl,
            fm,
            fr,
            whole: (r - l) / 6.0 * (fl + 4.0 * fm + fr),
        })
    };

    let nodes = iv.grid(ORACLE_INITIAL_PANELS + 1);
    let values = nodes.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let mut work = Vec::with_capacity(64);
    for i in (0..ORACLE_INITIAL_PANELS).rev() {
        work.push(panel(nodes[i], nodes[i + 1], values[i], values[i + 1])?);
    }

    let mut sum = 0.0;
    let mut compensation = 0.0;
    let mut add = |x: f64| {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            compensation += (sum - t) + x;
        } else {
            compensation += (x - t) + sum;
        }
        sum = t;
    };

    let mut processed = 0usize;
    while let Some(p) = work.pop() {
        processed += 1;
        if processed > ORACLE_BUDGET {
            return Err(Error::NoConvergence {
                budget: ORACLE_BUDGET,
            });
        }
        let m = 0.5 * (p.l + p.r);
        let left = panel(p.l, m, p.fl, p.fm)?;
        let right = panel(m, p.r, p.fm, p.fr)?;
        let delta = left.whole + right.whole - p.whole;
        if delta.abs() <= 15.0 * tol * (p.r - p.l) / total {
            add(left.whole + right.whole + delta / 15.0);
        } else if p.r - p.l <= total * 1e-13 {
            return Err(Error::NoConvergence { budget: processed });
        } else {
            work.push(right);
            work.push(left);
        }
    }
    Ok(sum + compensation)
}

/// Oracle tolerance for checking bounds: 100× tighter than the smallest
/// bound, clamped to [`ORACLE_TOL_FLOOR`, `ORACLE_TOL_CAP`].
pub fn oracle_tolerance(smallest_bound: f64) -> f64 {
    (smallest_bound / 100.0).clamp(ORACLE_TOL_FLOOR, ORACLE_TOL_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureReport {
    pub rule: Rule,
    /// Corrected rule only.
    pub mode: Option<Mode>,
    /// Corrected rule only.
    pub sign_variant: Option<SignVariant>,
    pub interval: Interval,
    pub panels: usize,
    pub value: f64,
    pub oracle: f64,
    pub abs_error: f64,
    pub bound: f64,
    pub bound_id: BoundId,
    pub satisfied: bool,
}

impl QuadratureReport {
    pub fn contains(&self, tol: f64) -> bool {
        self.abs_error <= self.bound + tol
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.satisfied = self.contains(tol);
        self
    }
}

/// Options for [`quad_report`] and [`composite_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleOptions {
    pub mode: Mode,
    pub sign_variant: SignVariant,
    /// `None` selects [`Rule::default_bound`].
    pub bound_id: Option<BoundId>,
    /// Grid used to estimate derivative bounds.
    pub grid: usize,
}

impl Default for RuleOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Shifted,
            sign_variant: SignVariant::Validated,
            bound_id: None,
            grid: 129,
        }
    }
}

/// The interval a bound is evaluated on: shifted-mode corrected rules work
/// in centred coordinates. The power surrogate is tied to the original
/// interval through `a0 = a`.
fn bound_interval(rule: Rule, mode: Mode, bound_id: BoundId, iv: &Interval) -> Interval {
    if rule == Rule::CorrectedSimpson && mode == Mode::Shifted && bound_id != BoundId::PowSurrogate
    {
        iv.centered()
    } else {
        *iv
    }
}

/// Applies `rule` on `iv` and compares it with the reference oracle and a bound.
pub fn quad_report(
    h: &FunctionHandle,
    iv: &Interval,
    rule: Rule,
    bounds: &DerivativeBounds,
    options: RuleOptions,
) -> Result<QuadratureReport> {
    let bound_id = options.bound_id.unwrap_or_else(|| rule.default_bound());
    let bound = bound_for(
        h,
        bound_id,
        &bound_interval(rule, options.mode, bound_id, iv),
        bounds,
    )?;
    let value = apply_rule(h, iv, rule, options.mode, options.sign_variant)?;
    let oracle = reference_integral(h, iv, oracle_tolerance(bound))?;
    let corrected = rule == Rule::CorrectedSimpson;
    let abs_error = (value - oracle).abs();
    Ok(QuadratureReport {
        rule,
        mode: corrected.then_some(options.mode),
        sign_variant: corrected.then_some(options.sign_variant),
        interval: *iv,
        panels: 1,
        value,
        oracle,
        abs_error,
        bound,
        bound_id,
        satisfied: abs_error <= bound + DEFAULT_TOLERANCE,
    })
}

/// Composite rule on equal panels: one report per panel plus the total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Composite {
    pub total: QuadratureReport,
    pub pieces: Vec<QuadratureReport>,
}

/// Applies `rule` on each of `panels` equal sub-intervals. Each piece gets
/// its own derivative bounds and oracle; the total bound is their sum.
pub fn composite(
    h: &FunctionHandle,
    iv: &Interval,
    rule: Rule,
    panels: usize,
    options: RuleOptions,
) -> Result<Composite> {
    if panels == 0 {
        return Err(Error::InvalidArgument("panel count must be >= 1".into()));
    }
    let pieces = iv
        .split(panels)
        .iter()
        .map(|piece| {
            let bounds = DerivativeBounds::estimate(h, piece, options.grid)?;
            quad_report(h, piece, rule, &bounds, options)
        })
        .collect::<Result<Vec<_>>>()?;
    let value: f64 = pieces.iter().map(|r| r.value).sum();
    let bound: f64 = pieces.iter().map(|r| r.bound).sum();
    let oracle = reference_integral(h, iv, oracle_tolerance(bound))?;
    let abs_error = (value - oracle).abs();
    let total = QuadratureReport {
        interval: *iv,
        panels,
        value,
        oracle,
        abs_error,
        bound,
        satisfied: abs_error <= bound + DEFAULT_TOLERANCE,
        ..pieces[0]
    };
    Ok(Composite { total, pieces })
}

/// Reports for each panel count plus the fitted convergence order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub reports: Vec<QuadratureReport>,
    /// Least-squares slope of log(error) against log(panel width); `None`
    /// when fewer than two errors rise above round-off.
    pub empirical_order: Option<f64>,
}

/// Errors at or below this level are treated as round-off when fitting the order.
const ORDER_FIT_FLOOR: f64 = 1e-13;

/// Composite version of `rule` on `panels` equal sub-intervals for each entry
/// of `panels_list`. Bounds are summed over panels, each with its own
/// derivative bounds.
pub fn composite_sweep(
    h: &FunctionHandle,
    iv: &Interval,
    rule: Rule,
    panels_list: &[usize],
    options: RuleOptions,
) -> Result<Sweep> {
    if panels_list.is_empty() || panels_list.contains(&0) {
        return Err(Error::InvalidArgument(
            "panel list must be nonempty with every entry >= 1".into(),
        ));
    }
    let bound_id = options.bound_id.unwrap_or_else(|| rule.default_bound());
    let corrected = rule == Rule::CorrectedSimpson;

    let mut rows = Vec::with_capacity(panels_list.len());
    for &panels in panels_list {
        let mut value = 0.0;
        let mut bound = 0.0;
        for piece in iv.split(panels) {
            value += apply_rule(h, &piece, rule, options.mode, options.sign_variant)?;
            let piece_bounds = DerivativeBounds::estimate(h, &piece, options.grid)?;
            bound += bound_for(
                h,
                bound_id,
                &bound_interval(rule, options.mode, bound_id, &piece),
                &piece_bounds,
            )?;
        }
        rows.push((panels, value, bound));
    }

    let smallest = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let oracle = reference_integral(h, iv, oracle_tolerance(smallest))?;
    let reports: Vec<QuadratureReport> = rows
        .into_iter()
        .map(|(panels, value, bound)| {
            let abs_error = (value - oracle).abs();
            QuadratureReport {
                rule,
                mode: corrected.then_some(options.mode),
                sign_variant: corrected.then_some(options.sign_variant),
                interval: *iv,
                panels,
                value,
                oracle,
                abs_error,
                bound,
                bound_id,
                satisfied: abs_error <= bound + DEFAULT_TOLERANCE,
            }
        })
        .collect();

    let points: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.abs_error > ORDER_FIT_FLOOR)
        .map(|r| ((iv.width() / r.panels as f64).ln(), r.abs_error.ln()))
        .collect();
    Ok(Sweep {
        empirical_order: fit_slope(&points),
        reports,
    })
}

fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}
