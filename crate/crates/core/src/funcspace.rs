//! Function catalog, analytic derivatives and derivative-bound oracles.
//!
//! Every catalog entry supplies its derivatives up to order 4 in closed form.
//! Bounds on f'', f''' and f'''' over an interval come either from an exact
//! analysis of the closed form (`Provenance::Analytic`) or from a padded grid
//! search (`Provenance::Sampled`).

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest grid accepted by the sampling oracles.
pub const MIN_GRID: usize = 33;

/// Relative padding applied to sampled derivative ranges.
pub const SAMPLED_PADDING: f64 = 0.05;

/// Relative padding applied to finite-difference Lipschitz estimates.
pub const SLOPE_PADDING: f64 = 0.10;

/// A closed segment `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Midpoint `(a + b) / 2`.
    pub fn c(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }

    /// `k`-th of `n + 1` equispaced nodes, computed as `a + k (b - a) / n`.
    pub fn node(&self, k: usize, n: usize) -> f64 {
        if k == n {
            return self.b;
        }
        self.a + (k as f64) * self.width() / (n as f64)
    }

    /// The interval of the same width centred at the origin.
    pub fn centered(&self) -> Interval {
        let h = 0.5 * self.width();
        Interval { a: -h, b: h }
    }

    /// Splits the interval into `panels` equal sub-intervals.
    pub fn split(&self, panels: usize) -> Vec<Interval> {
        (0..panels)
            .map(|k| Interval {
                a: self.node(k, panels),
                b: self.node(k + 1, panels),
            })
            .collect()
    }

    /// `points` equispaced abscissae including both endpoints.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        debug_assert!(points >= 2);
        (0..points).map(|i| self.node(i, points - 1)).collect()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

/// Maximal evaluation range of a catalog function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
}

impl Domain {
    pub const REAL_LINE: Domain = Domain {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_closed: false,
    };

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed {
            x >= self.lo
        } else {
            x > self.lo
        };
        x.is_finite() && above && x < self.hi
    }

    pub fn contains_interval(&self, iv: &Interval) -> bool {
        self.contains(iv.a()) && self.contains(iv.b())
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        write!(f, "{open}{}, {})", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// ln(1 + s + x)
    Log1p {
        shift: f64,
    },
    Exp,
    Sin,
    /// 1 / (1 + 25 x^2)
    Runge,
    /// c3 x^3 + c2 x^2 + c1 x + c0
    Cubic {
        c3: f64,
        c2: f64,
        c1: f64,
        c0: f64,
    },
    /// (x - a0)^p
    Pow {
        p: f64,
        a0: f64,
    },
}

/// An immutable, thread-safe handle on a catalog function and its derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionHandle {
    kind: Kind,
    name: String,
    params: BTreeMap<String, f64>,
    domain: Domain,
}

/// Where a derivative bound came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    Sampled,
}

impl Provenance {
    fn join(self, other: Provenance) -> Provenance {
        if self == Provenance::Analytic && other == Provenance::Analytic {
            Provenance::Analytic
        } else {
            Provenance::Sampled
        }
    }
}

fn is_integer(p: f64) -> bool {
    p.fract() == 0.0 && p.abs() < 2f64.powi(31)
}

fn param(
    function: &str,
    params: &BTreeMap<String, f64>,
    name: &str,
    default: Option<f64>,
) -> Result<f64> {
    match params.get(name).copied().or(default) {
        Some(v) if v.is_finite() => Ok(v),
        Some(_) => Err(Error::InvalidParameter {
            function: function.into(),
            name: name.into(),
            reason: "must be finite".into(),
        }),
        None => Err(Error::InvalidParameter {
            function: function.into(),
            name: name.into(),
            reason: "missing".into(),
        }),
    }
}

/// Builds a handle for a catalog entry.
///
/// Known names: `log1p` (optional shift `s`), `exp`, `sin`, `runge`,
/// `cubic` (`c3`, `c2`, `c1`, `c0`, each defaulting to 0) and `pow` / `pow_p`
/// (`p > 0` and `a0` required).
pub fn catalog_lookup(name: &str, params: &BTreeMap<String, f64>) -> Result<FunctionHandle> {
    let allowed: &[&str] = match name {
        "log1p" => &["s"],
        "exp" | "sin" | "runge" => &[],
        "cubic" => &["c3", "c2", "c1", "c0"],
        "pow" | "pow_p" => &["p", "a0"],
        _ => return Err(Error::UnknownFunction(name.into())),
    };
    if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::InvalidParameter {
            function: name.into(),
            name: extra.clone(),
            reason: "not a parameter of this function".into(),
        });
    }

    let (kind, domain) = match name {
        "log1p" => {
            let shift = param(name, params, "s", Some(0.0))?;
            let domain = Domain {
                lo: -1.0 - shift,
                hi: f64::INFINITY,
                lo_closed: false,
            };
            (Kind::Log1p { shift }, domain)
        }
        "exp" => (Kind::Exp, Domain::REAL_LINE),
        "sin" => (Kind::Sin, Domain::REAL_LINE),
        "runge" => (Kind::Runge, Domain::REAL_LINE),
        "cubic" => {
            let c = |k| param(name, params, k, Some(0.0));
            let kind = Kind::Cubic {
                c3: c("c3")?,
                c2: c("c2")?,
                c1: c("c1")?,
                c0: c("c0")?,
            };
            (kind, Domain::REAL_LINE)
        }
        _ => {
            let p = param(name, params, "p", None)?;
            let a0 = param(name, params, "a0", None)?;
            if p <= 0.0 {
                return Err(Error::InvalidParameter {
                    function: name.into(),
                    name: "p".into(),
                    reason: format!("must be positive, got {p}"),
                });
            }
            let domain = if is_integer(p) {
                Domain::REAL_LINE
            } else {
                Domain {
                    lo: a0,
                    hi: f64::INFINITY,
                    lo_closed: true,
                }
            };
            (Kind::Pow { p, a0 }, domain)
        }
    };

    let name = if name == "pow_p" { "pow" } else { name };
    Ok(FunctionHandle {
        kind,
        name: name.to_string(),
        params: params.clone(),
        domain,
    })
}

impl FunctionHandle {
    /// Parses the catalog syntax `name` or `name:key=value,key=value`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, rest) = match spec.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r)),
            None => (spec, None),
        };
        let mut params = BTreeMap::new();
        for item in rest.into_iter().flat_map(|r| r.split(',')) {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter {
                    function: name.into(),
                    name: item.into(),
                    reason: "expected key=value".into(),
                })?;
            let value: f64 = value.trim().parse().map_err(|_| Error::InvalidParameter {
                function: name.into(),
                name: key.trim().into(),
                reason: format!("`{}` is not a number", value.trim()),
            })?;
            params.insert(key.trim().to_string(), value);
        }
        catalog_lookup(name, &params)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Canonical catalog string, e.g. `pow:a0=-1,p=3.5`.
    pub fn spec_string(&self) -> String {
        if self.params.is_empty() {
            return self.name.clone();
        }
        let params: Vec<String> = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!("{}:{}", self.name, params.join(","))
    }

    /// Degree of the function when it is a polynomial.
    pub fn polynomial_degree(&self) -> Option<u32> {
        match self.kind {
            Kind::Cubic { c3, c2, c1, .. } => Some(if c3 != 0.0 {
                3
            } else if c2 != 0.0 {
                2
            } else if c1 != 0.0 {
                1
            } else {
                0
            }),
            Kind::Pow { p, .. } if is_integer(p) => Some(p as u32),
            _ => None,
        }
    }

    /// Value of the `order`-th derivative at `x`, `order <= 4`.
    pub fn eval(&self, x: f64, order: u8) -> Result<f64> {
        if order > 4 {
            return Err(Error::OrderUnavailable {
                function: self.name.clone(),
                order,
            });
        }
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain {
                function: self.spec_string(),
                x,
                domain: self.domain.to_string(),
            });
        }
        let value = self.eval_unchecked(x, order);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFinite {
                function: self.spec_string(),
                order,
                x,
            })
        }
    }

    /// Shorthand for `eval(x, 0)`.
    pub fn value(&self, x: f64) -> Result<f64> {
        self.eval(x, 0)
    }

    fn eval_unchecked(&self, x: f64, order: u8) -> f64 {
        match self.kind {
            Kind::Log1p { shift } => {
                let u = 1.0 + shift + x;
                match order {
                    0 => u.ln(),
                    1 => 1.0 / u,
                    2 => -1.0 / (u * u),
                    3 => 2.0 / (u * u * u),
                    _ => -6.0 / (u * u * u * u),
                }
            }
            Kind::Exp => x.exp(),
            Kind::Sin => match order % 4 {
                0 => x.sin(),
                1 => x.cos(),
                2 => -x.sin(),
                _ => -x.cos(),
            },
            Kind::Runge => {
                let x2 = x * x;
                let u = 1.0 + 25.0 * x2;
                match order {
                    0 => 1.0 / u,
                    1 => -50.0 * x / (u * u),
                    2 => (3750.0 * x2 - 50.0) / u.powi(3),
                    3 => (15000.0 * x - 375000.0 * x * x2) / u.powi(4),
                    _ => (15000.0 - 3_750_000.0 * x2 + 46_875_000.0 * x2 * x2) / u.powi(5),
                }
            }
            Kind::Cubic { c3, c2, c1, c0 } => match order {
                0 => ((c3 * x + c2) * x + c1) * x + c0,
                1 => (3.0 * c3 * x + 2.0 * c2) * x + c1,
                2 => 6.0 * c3 * x + 2.0 * c2,
                3 => 6.0 * c3,
                _ => 0.0,
            },
            Kind::Pow { p, a0 } => {
                let coef = falling_factorial(p, order);
                if coef == 0.0 {
                    return 0.0;
                }
                let t = x - a0;
                let exponent = p - f64::from(order);
                if is_integer(p) {
                    coef * t.powi(exponent as i32)
                } else {
                    coef * t.powf(exponent)
                }
            }
        }
    }

    /// Exact range of the `order`-th derivative over `iv` when the closed form
    /// allows it (monotone pieces or known crests). `None` otherwise.
    pub fn analytic_range(&self, iv: &Interval, order: u8) -> Option<(f64, f64)> {
        let ends = || -> Option<(f64, f64)> {
            let fa = self.eval(iv.a(), order).ok()?;
            let fb = self.eval(iv.b(), order).ok()?;
            Some((fa.min(fb), fa.max(fb)))
        };
        match self.kind {
            Kind::Log1p { .. } | Kind::Exp => ends(),
            Kind::Cubic { .. } if order >= 2 => ends(),
            Kind::Cubic { .. } | Kind::Runge => None,
            Kind::Pow { p, a0 } => {
                let (mut lo, mut hi) = ends()?;
                let exponent = p - f64::from(order);
                // t^m changes monotonicity at t = 0 for positive even powers.
                if iv.a() < a0 && a0 < iv.b() && exponent > 0.0 {
                    lo = lo.min(0.0);
                    hi = hi.max(0.0);
                }
                Some((lo, hi))
            }
            Kind::Sin => {
                let (mut lo, mut hi) = ends()?;
                // d^k/dx^k sin x = sin(x + k pi/2): crest where x + k pi/2 = pi/2 (mod 2 pi).
                let phase = f64::from(order % 4) * FRAC_PI_2;
                if crest_inside(iv, FRAC_PI_2 - phase) {
                    hi = 1.0;
                }
                if crest_inside(iv, -FRAC_PI_2 - phase) {
                    lo = -1.0;
                }
                Some((lo, hi))
            }
        }
    }
}

fn crest_inside(iv: &Interval, base: f64) -> bool {
    let j = ((iv.a() - base) / TAU).ceil();
    let x = base + j * TAU;
    x <= iv.b()
}

fn falling_factorial(p: f64, order: u8) -> f64 {
    (0..order).map(|j| p - f64::from(j)).product()
}

/// Closed range `[lo, hi]` of one derivative over an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivRange {
    pub lo: f64,
    pub hi: f64,
}

impl DerivRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidArgument(format!(
                "derivative range needs finite lo <= hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// `max(|lo|, |hi|)`, the sup of the absolute value.
    pub fn abs_max(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// `hi - lo`.
    pub fn oscillation(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Result of [`estimate_bounds`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeEstimate {
    pub range: DerivRange,
    pub provenance: Provenance,
}

/// Derivative ranges `(m_k, M_k)` for k = 2, 3, 4 and a Lipschitz constant for f'''.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBounds {
    pub second: Option<DerivRange>,
    pub third: Option<DerivRange>,
    pub fourth: Option<DerivRange>,
    pub lipschitz3: Option<f64>,
    pub provenance: Provenance,
}

impl Default for DerivativeBounds {
    fn default() -> Self {
        Self {
            second: None,
            third: None,
            fourth: None,
            lipschitz3: None,
            provenance: Provenance::Analytic,
        }
    }
}

impl DerivativeBounds {
    pub fn with_second(mut self, lo: f64, hi: f64) -> Result<Self> {
        self.second = Some(DerivRange::new(lo, hi)?);
        Ok(self)
    }

    pub fn with_third(mut self, lo: f64, hi: f64) -> Result<Self> {
        self.third = Some(DerivRange::new(lo, hi)?);
        Ok(self)
    }

    pub fn with_fourth(mut self, lo: f64, hi: f64) -> Result<Self> {
        self.fourth = Some(DerivRange::new(lo, hi)?);
        Ok(self)
    }

    pub fn with_lipschitz(mut self, lipschitz: f64) -> Result<Self> {
        if !(lipschitz.is_finite() && lipschitz >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Lipschitz constant must be finite and >= 0, got {lipschitz}"
            )));
        }
        self.lipschitz3 = Some(lipschitz);
        Ok(self)
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn second(&self) -> Result<DerivRange> {
        self.second.ok_or(Error::MissingBound("m2/M2"))
    }

    pub fn third(&self) -> Result<DerivRange> {
        self.third.ok_or(Error::MissingBound("m3/M3"))
    }

    pub fn fourth(&self) -> Result<DerivRange> {
        self.fourth.ok_or(Error::MissingBound("m4/M4"))
    }

    pub fn lipschitz(&self) -> Result<f64> {
        self.lipschitz3
            .ok_or(Error::MissingBound("Lipschitz constant of f'''"))
    }

    /// Fills every order the handle supports over `iv`.
    ///
    /// Orders 2 and 3 are mandatory. Order 4 and the Lipschitz constant are
    /// left empty when f'''' is not finite on `iv` (C³-only integrands); the
    /// finite-difference fallback of [`estimate_lipschitz`] is never stored
    /// here because it is not a certified constant.
    pub fn estimate(h: &FunctionHandle, iv: &Interval, grid: usize) -> Result<Self> {
        let second = estimate_bounds(h, iv, 2, grid)?;
        let third = estimate_bounds(h, iv, 3, grid)?;
        let mut provenance = second.provenance.join(third.provenance);
        let mut bounds = DerivativeBounds {
            second: Some(second.range),
            third: Some(third.range),
            ..Default::default()
        };
        if let Ok(fourth) = estimate_bounds(h, iv, 4, grid) {
            // sampled ranges are already padded
            let lipschitz = fourth.range.abs_max();
            provenance = provenance.join(fourth.provenance);
            bounds.fourth = Some(fourth.range);
            bounds.lipschitz3 = Some(lipschitz);
        }
        bounds.provenance = provenance;
        Ok(bounds)
    }
}

fn check_grid(grid: usize) -> Result<()> {
    if grid < MIN_GRID {
        return Err(Error::InvalidArgument(format!(
            "grid must have at least {MIN_GRID} points, got {grid}"
        )));
    }
    Ok(())
}

fn check_inside(h: &FunctionHandle, iv: &Interval) -> Result<()> {
    for x in [iv.a(), iv.b()] {
        if !h.domain().contains(x) {
            return Err(Error::OutsideDomain {
                function: h.spec_string(),
                x,
                domain: h.domain().to_string(),
            });
        }
    }
    Ok(())
}

/// Golden-section refinement of a bracketed local extremum of `g`.
fn refine_extremum(
    g: impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    maximize: bool,
) -> Result<f64> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let sign = if maximize { 1.0 } else { -1.0 };
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut g1 = sign * g(x1)?;
    let mut g2 = sign * g(x2)?;
    for _ in 0..60 {
        if g1 < g2 {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + INV_PHI * (hi - lo);
            g2 = sign * g(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - INV_PHI * (hi - lo);
            g1 = sign * g(x1)?;
        }
    }
    Ok(sign * g1.max(g2))
}

/// Min and max of `g` over a uniform grid, with golden-section refinement
/// around interior discrete extrema.
fn sampled_extremes(
    g: impl Fn(f64) -> Result<f64>,
    iv: &Interval,
    grid: usize,
) -> Result<(f64, f64)> {
    let xs = iv.grid(grid);
    let ys = xs.iter().map(|&x| g(x)).collect::<Result<Vec<_>>>()?;
    let mut lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for i in 1..ys.len() - 1 {
        if ys[i] >= ys[i - 1] && ys[i] >= ys[i + 1] {
            hi = hi.max(refine_extremum(&g, xs[i - 1], xs[i + 1], true)?);
        }
        if ys[i] <= ys[i - 1] && ys[i] <= ys[i + 1] {
            lo = lo.min(refine_extremum(&g, xs[i - 1], xs[i + 1], false)?);
        }
    }
    Ok((lo, hi))
}

/// Inf and sup of the `order`-th derivative over `iv`, `order ∈ {2, 3, 4}`.
///
/// Closed-form ranges are returned unpadded with `Provenance::Analytic`.
/// Otherwise the derivative is sampled on `grid` points and the range is
/// widened on both sides by 5% of its width plus one machine epsilon.
pub fn estimate_bounds(
    h: &FunctionHandle,
    iv: &Interval,
    order: u8,
    grid: usize,
) -> Result<RangeEstimate> {
    if !(2..=4).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "derivative order must be 2, 3 or 4, got {order}"
        )));
    }
    check_grid(grid)?;
    check_inside(h, iv)?;

    if let Some((lo, hi)) = h.analytic_range(iv, order) {
        return Ok(RangeEstimate {
            range: DerivRange::new(lo, hi)?,
            provenance: Provenance::Analytic,
        });
    }

    let (lo, hi) = sampled_extremes(|x| h.eval(x, order), iv, grid)?;
    let pad = SAMPLED_PADDING * (hi - lo) + f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
    Ok(RangeEstimate {
        range: DerivRange::new(lo - pad, hi + pad)?,
        provenance: Provenance::Sampled,
    })
}

/// A Lipschitz constant for f''' over `iv`.
///
/// Uses sup |f''''| when the fourth derivative is finite on `iv` (exact for
/// closed-form ranges, 5% padded when sampled). When f'''' blows up, falls
/// back to the steepest secant slope of f''' between adjacent grid points,
/// padded by 10%; that value is grid-limited and flagged `Sampled`.
pub fn estimate_lipschitz(
    h: &FunctionHandle,
    iv: &Interval,
    grid: usize,
) -> Result<(f64, Provenance)> {
    check_grid(grid)?;
    check_inside(h, iv)?;

    if let Some((lo, hi)) = h.analytic_range(iv, 4) {
        return Ok((lo.abs().max(hi.abs()), Provenance::Analytic));
    }
    if let Ok((lo, hi)) = sampled_extremes(|x| h.eval(x, 4), iv, grid) {
        return Ok((
            (1.0 + SAMPLED_PADDING) * lo.abs().max(hi.abs()),
            Provenance::Sampled,
        ));
    }

    let xs = iv.grid(grid);
    let ys = xs
        .iter()
        .map(|&x| h.eval(x, 3))
        .collect::<Result<Vec<_>>>()?;
    let slope = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
        .fold(0.0, f64::max);
    Ok(((1.0 + SLOPE_PADDING) * slope, Provenance::Sampled))
}
