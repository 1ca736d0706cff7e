//! Classical and optimized second-order Taylor-like expansions of `f(b)` about `a`.
//!
//! The optimized expansion replaces `f'(a)` by a trapezoid-weighted mean of
//! `f'` at `n + 1` equispaced nodes and adds an endpoint `f''` correction with
//! weights `±3/(32 n²)`. All remainder envelopes stored in an
//! [`ExpansionReport`] bound the total error `f(b) - estimate`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{DerivativeBounds, FunctionHandle, Interval};

/// Largest number of subintervals accepted by the public interface.
pub const MAX_N: usize = 1_000_000;

/// Absolute slack used when checking an error against its envelope.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Which f'' weights the second-order expansion uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `ω₀ = -ω_n = 3/(32n²)`; the weights sum to zero.
    Closure,
    /// `ω₀ = 3/(32n²)`, `ω_n = 0`; only f''(a) enters the estimate.
    Open,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Closure => "closure",
            Variant::Open => "open",
        }
    }
}

/// The f'' weights `ω_k(n)`, `k = 0..=n`. Interior weights are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightScheme {
    pub n: usize,
    pub omega0: f64,
    pub omega_n: f64,
    pub variant: Variant,
}

impl WeightScheme {
    pub fn weight(&self, k: usize) -> f64 {
        match k {
            0 => self.omega0,
            k if k == self.n => self.omega_n,
            _ => 0.0,
        }
    }

    pub fn sum(&self) -> f64 {
        (0..=self.n).map(|k| self.weight(k)).sum()
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(Error::InvalidArgument(format!(
            "number of subintervals must be in 1..={MAX_N}, got {n}"
        )));
    }
    Ok(())
}

/// `3 / (32 n²)`.
fn base_weight(n: usize) -> f64 {
    let n = n as f64;
    3.0 / (32.0 * n * n)
}

pub fn weights(n: usize, variant: Variant) -> Result<WeightScheme> {
    check_n(n)?;
    let omega0 = base_weight(n);
    let omega_n = match variant {
        Variant::Closure => -omega0,
        Variant::Open => 0.0,
    };
    Ok(WeightScheme {
        n,
        omega0,
        omega_n,
        variant,
    })
}

/// Trapezoid-weighted mean of f' over `n + 1` equispaced nodes.
pub fn lambda1(h: &FunctionHandle, iv: &Interval, n: usize) -> Result<f64> {
    check_n(n)?;
    let nf = n as f64;
    let ends = (h.eval(iv.b(), 1)? + h.eval(iv.a(), 1)?) / (2.0 * nf);
    let mut interior = 0.0;
    for k in 1..n {
        interior += h.eval(iv.node(k, n), 1)?;
    }
    Ok(ends + interior / nf)
}

/// Weighted f'' correction `Σ ω_k f''(x_k)`.
pub fn lambda2(h: &FunctionHandle, iv: &Interval, n: usize, variant: Variant) -> Result<f64> {
    let w = weights(n, variant)?;
    match variant {
        Variant::Closure => Ok(-w.omega0 * (h.eval(iv.b(), 2)? - h.eval(iv.a(), 2)?)),
        Variant::Open => Ok(w.omega0 * h.eval(iv.a(), 2)?),
    }
}

/// Which expansion produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionKind {
    Classical,
    FirstOrder,
    SecondOrder(Variant),
}

impl ExpansionKind {
    /// Short rule name used in reports.
    pub fn rule_name(&self) -> &'static str {
        match self {
            ExpansionKind::Classical => "taylor2",
            ExpansionKind::FirstOrder => "taylor_like1",
            ExpansionKind::SecondOrder(Variant::Closure) => "taylor_like2",
            ExpansionKind::SecondOrder(Variant::Open) => "taylor_like2_open",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub kind: ExpansionKind,
    pub order: u8,
    /// Number of subintervals (1 for the classical formula).
    pub n: usize,
    pub estimate: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub remainder_lo: f64,
    pub remainder_hi: f64,
    pub truth: f64,
    pub actual_error: f64,
    pub satisfied: bool,
}

impl ExpansionReport {
    fn build(
        kind: ExpansionKind,
        n: usize,
        estimate: f64,
        (lambda1, lambda2): (f64, f64),
        (remainder_lo, remainder_hi): (f64, f64),
        truth: f64,
    ) -> Self {
        let order = match kind {
            ExpansionKind::FirstOrder => 1,
            _ => 2,
        };
        let actual_error = truth - estimate;
        let mut report = Self {
            kind,
            order,
            n,
            estimate,
            lambda1,
            lambda2,
            remainder_lo,
            remainder_hi,
            truth,
            actual_error,
            satisfied: false,
        };
        report.satisfied = report.contains(DEFAULT_TOLERANCE);
        report
    }

    /// `remainder_lo - tol <= actual_error <= remainder_hi + tol`.
    pub fn contains(&self, tol: f64) -> bool {
        self.remainder_lo - tol <= self.actual_error && self.actual_error <= self.remainder_hi + tol
    }

    /// Re-evaluates `satisfied` under another tolerance.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.satisfied = self.contains(tol);
        self
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.remainder_hi - self.remainder_lo)
    }
}

/// Envelope of `f(b) - estimate` for the optimized second-order expansion.
pub fn envelope_second_order(
    bounds: &DerivativeBounds,
    iv: &Interval,
    n: usize,
    variant: Variant,
) -> Result<(f64, f64)> {
    check_n(n)?;
    let third = bounds.third()?;
    let (m3, big_m3) = (third.lo, third.hi);
    let w = iv.width();
    let nf = n as f64;
    let scale = w * w * w / (96.0 * nf * nf);
    let mut lo = scale * (2.0 * m3 - big_m3);
    let mut hi = scale * (2.0 * big_m3 - m3);
    if variant == Variant::Open {
        let second = bounds.second()?;
        let shift = base_weight(n) * w * w;
        lo -= shift * second.hi;
        hi -= shift * second.lo;
    }
    Ok((lo, hi))
}

/// Envelope `[(b-a)³ m₃/6, (b-a)³ M₃/6]` of the classical second-order formula.
pub fn envelope_classical(bounds: &DerivativeBounds, iv: &Interval) -> Result<(f64, f64)> {
    let third = bounds.third()?;
    let w3 = iv.width().powi(3);
    Ok((w3 * third.lo / 6.0, w3 * third.hi / 6.0))
}

/// Symmetric classical bound `(b-a)³ max(|m₃|, |M₃|) / 6`.
pub fn classical_symmetric_bound(bounds: &DerivativeBounds, iv: &Interval) -> Result<f64> {
    Ok(iv.width().powi(3) * bounds.third()?.abs_max() / 6.0)
}

/// Half-width `(b-a)² (M₂ - m₂) / (8n)` of the first-order envelope.
pub fn first_order_half_width(bounds: &DerivativeBounds, iv: &Interval, n: usize) -> Result<f64> {
    check_n(n)?;
    let w = iv.width();
    Ok(w * w * bounds.second()?.oscillation() / (8.0 * n as f64))
}

pub fn expand_second_order(
    h: &FunctionHandle,
    iv: &Interval,
    n: usize,
    bounds: &DerivativeBounds,
    variant: Variant,
) -> Result<ExpansionReport> {
    let envelope = envelope_second_order(bounds, iv, n, variant)?;
    let l1 = lambda1(h, iv, n)?;
    let l2 = lambda2(h, iv, n, variant)?;
    let w = iv.width();
    let estimate = h.value(iv.a())? + w * l1 + w * w * l2;
    Ok(ExpansionReport::build(
        ExpansionKind::SecondOrder(variant),
        n,
        estimate,
        (l1, l2),
        envelope,
        h.value(iv.b())?,
    ))
}

pub fn expand_first_order(
    h: &FunctionHandle,
    iv: &Interval,
    n: usize,
    bounds: &DerivativeBounds,
) -> Result<ExpansionReport> {
    let half = first_order_half_width(bounds, iv, n)?;
    let l1 = lambda1(h, iv, n)?;
    let estimate = h.value(iv.a())? + iv.width() * l1;
    Ok(ExpansionReport::build(
        ExpansionKind::FirstOrder,
        n,
        estimate,
        (l1, 0.0),
        (-half, half),
        h.value(iv.b())?,
    ))
}

pub fn expand_classical(
    h: &FunctionHandle,
    iv: &Interval,
    bounds: &DerivativeBounds,
) -> Result<ExpansionReport> {
    let envelope = envelope_classical(bounds, iv)?;
    let w = iv.width();
    let d1 = h.eval(iv.a(), 1)?;
    let half_d2 = h.eval(iv.a(), 2)? / 2.0;
    let estimate = h.value(iv.a())? + w * d1 + w * w * half_d2;
    Ok(ExpansionReport::build(
        ExpansionKind::Classical,
        1,
        estimate,
        (d1, half_d2),
        envelope,
        h.value(iv.b())?,
    ))
}
