//! Command-line front end: `expand`, `interp`, `quad`, `bench` and `verify`.
//!
//! Every invocation writes one document to standard output, JSON or CSV.
//! Exit codes: 0 when every bound check holds, 1 when one fails, 2 on a
//! usage or evaluation error (with a one-line diagnostic on standard error).

use std::f64::consts::FRAC_PI_2;
use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::{Parser, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::expansion::{
    self, classical_symmetric_bound, envelope_second_order, expand_classical, expand_first_order,
    expand_second_order, ExpansionKind, ExpansionReport, Variant,
};
use crate::funcspace::{DerivativeBounds, FunctionHandle, Interval, Provenance};
use crate::interpolation::{
    corrected_bound, corrected_interpolant_with, cubic_lagrange_bound, p2_error_bounds,
    p2_interpolate,
};
use crate::quadrature::{
    self, composite, composite_sweep, power_surrogate_bound, quad_bound, quad_report,
    reference_integral, resolve_sign_pattern, BoundId, FirstSign, Mode, QuadratureReport, Rule,
    RuleOptions, SecondCorrection,
};
use crate::sign::SignVariant;

/// Environment variable overriding the default suite tolerance.
pub const TOLERANCE_ENV: &str = "TAYLOR_SHARP_TOL";

/// Grid used to estimate derivative bounds.
pub const BOUNDS_GRID: usize = 257;

/// Functions and intervals shared by `bench` and `verify`.
pub const BATTERY: [(&str, f64, f64); 4] = [
    ("log1p", 0.0, 1.0),
    ("exp", -1.0, 1.0),
    ("sin", 0.0, FRAC_PI_2),
    ("pow:p=3.5,a0=-1", -1.0, 1.0),
];

/// Integrands for the random-interval corrected-rule check in `verify`.
pub const CORRECTED_FAMILY: [&str; 3] = ["exp", "sin", "log1p:s=2"];

/// Random intervals drawn per integrand in `verify`.
pub const RANDOM_INTERVALS: usize = 10;

/// Random cubics checked against the constant-f''' error formula in `verify`.
pub const RANDOM_CUBICS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Expand,
    Interp,
    Quad,
    Bench,
    Verify,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Expand => "expand",
            Command::Interp => "interp",
            Command::Quad => "quad",
            Command::Bench => "bench",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Closure,
    Open,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Literal,
    Shifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Paper,
    Validated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "taylor-sharp",
    version,
    about = "Sharpened Taylor-like expansions, corrected interpolation and quadrature with error envelopes",
    allow_negative_numbers = true
)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Catalog function, e.g. `log1p`, `pow:p=3.5,a0=-1`.
    #[arg(long = "fn", value_name = "SPEC")]
    pub function: Option<String>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Subintervals of the expansion.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Expansion order (1 or 2).
    #[arg(long, default_value_t = 2)]
    pub order: u8,
    #[arg(long, value_enum, default_value_t = VariantArg::Closure)]
    pub variant: VariantArg,
    /// Half-point convention of the corrected quadrature rule.
    #[arg(long, value_enum, default_value_t = ModeArg::Shifted)]
    pub mode: ModeArg,
    #[arg(long = "sign-variant", value_enum, default_value_t = SignArg::Validated)]
    pub sign_variant: SignArg,
    /// expand: taylor2 | taylor_like1 | taylor_like2 | taylor_like2_open;
    /// interp: p2 | p2_corrected; quad: simpson | corrected_simpson | cheng_sun.
    #[arg(long)]
    pub rule: Option<String>,
    /// c4 | c3_sup | c3_osc | lipschitz | lipschitz_bis | cheng_sun | pow_surrogate.
    #[arg(long)]
    pub bound: Option<String>,
    /// Points of the interpolation error grid.
    #[arg(long, default_value_t = 1001)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for the random intervals of `verify`.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Equal panels of a composite quadrature rule.
    #[arg(long, default_value_t = 1)]
    pub panels: usize,
    /// Comma-separated panel counts for a convergence sweep.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Vec<usize>,
}

/// Validated configuration for [`dispatch`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub function: Option<FunctionHandle>,
    pub interval: Option<Interval>,
    pub n: usize,
    pub order: u8,
    pub variant: VariantArg,
    pub mode: Mode,
    pub sign_variant: SignVariant,
    pub rule: Option<String>,
    pub bound: Option<BoundId>,
    pub grid: usize,
    pub format: Format,
    pub seed: u64,
    pub panels: usize,
    pub sweep: Vec<usize>,
    pub tolerance: f64,
}

impl RunConfig {
    pub fn from_args(args: Args, tolerance: f64) -> Result<Self> {
        if args.n == 0 {
            return Err(Error::InvalidArgument("--n must be >= 1".into()));
        }
        if args.grid < 3 {
            return Err(Error::InvalidArgument("--grid must be >= 3".into()));
        }
        if args.panels == 0 || args.sweep.contains(&0) {
            return Err(Error::InvalidArgument("panel counts must be >= 1".into()));
        }
        let function = args
            .function
            .as_deref()
            .map(FunctionHandle::parse)
            .transpose()?;
        let interval = match (args.a, args.b) {
            (Some(a), Some(b)) => Some(Interval::new(a, b)?),
            (None, None) => None,
            _ => {
                return Err(Error::InvalidArgument(
                    "--a and --b must be given together".into(),
                ))
            }
        };
        let bound = args.bound.as_deref().map(parse_bound).transpose()?;
        Ok(Self {
            command: args.command,
            function,
            interval,
            n: args.n,
            order: args.order,
            variant: args.variant,
            mode: match args.mode {
                ModeArg::Literal => Mode::Literal,
                ModeArg::Shifted => Mode::Shifted,
            },
            sign_variant: match args.sign_variant {
                SignArg::Paper => SignVariant::Paper,
                SignArg::Validated => SignVariant::Validated,
            },
            rule: args.rule,
            bound,
            grid: args.grid,
            format: args.format,
            seed: args.seed,
            panels: args.panels,
            sweep: args.sweep,
            tolerance,
        })
    }

    fn target(&self) -> Result<(FunctionHandle, Interval)> {
        let h = self.function.clone().ok_or_else(|| {
            Error::InvalidArgument(format!("`{}` needs --fn", self.command.as_str()))
        })?;
        let iv = self.interval.ok_or_else(|| {
            Error::InvalidArgument(format!("`{}` needs --a and --b", self.command.as_str()))
        })?;
        Ok((h, iv))
    }

    fn rule_options(&self) -> RuleOptions {
        RuleOptions {
            mode: self.mode,
            sign_variant: self.sign_variant,
            bound_id: self.bound,
            ..Default::default()
        }
    }
}

pub fn parse_bound(s: &str) -> Result<BoundId> {
    const ALL: [BoundId; 7] = [
        BoundId::C4,
        BoundId::C3Sup,
        BoundId::C3Osc,
        BoundId::Lipschitz,
        BoundId::LipschitzBis,
        BoundId::ChengSun,
        BoundId::PowSurrogate,
    ];
    ALL.into_iter()
        .find(|b| b.as_str() == s)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown bound `{s}`")))
}

pub fn parse_quad_rule(s: &str) -> Result<Rule> {
    [Rule::Simpson, Rule::CorrectedSimpson, Rule::ChengSun]
        .into_iter()
        .find(|r| r.as_str() == s)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown quadrature rule `{s}`")))
}

/// Parses a tolerance override; `None` yields the default 1e-12.
pub fn tolerance_from(value: Option<&str>) -> Result<f64> {
    let Some(raw) = value else {
        return Ok(expansion::DEFAULT_TOLERANCE);
    };
    match raw.trim().parse::<f64>() {
        Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
        _ => Err(Error::InvalidArgument(format!(
            "{TOLERANCE_ENV} must be a finite number >= 0, got `{raw}`"
        ))),
    }
}

/// One output value.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(u64),
    Flag(bool),
    /// Nested `{a, b}` in JSON, two columns `a`, `b` in CSV.
    Interval(Interval),
    /// An absent interval; keeps the two CSV columns.
    NoInterval,
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Flag(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_owned())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<Interval> for Cell {
    fn from(x: Interval) -> Self {
        Cell::Interval(x)
    }
}

/// Ordered named cells; the order is the column order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row {
    cells: Vec<(&'static str, Cell)>,
}

impl Row {
    pub fn with(mut self, key: &'static str, cell: impl Into<Cell>) -> Self {
        self.cells.push((key, cell.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.cells.iter().find(|(k, _)| *k == key).map(|(_, c)| c)
    }

    fn json(&self) -> Map<String, Value> {
        let num = |x: f64| serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        self.cells
            .iter()
            .map(|(k, c)| {
                let v = match c {
                    Cell::Text(s) => Value::String(s.clone()),
                    Cell::Num(x) => num(*x),
                    Cell::Int(i) => Value::from(*i),
                    Cell::Flag(f) => Value::Bool(*f),
                    Cell::Interval(iv) => {
                        let mut m = Map::new();
                        m.insert("a".into(), num(iv.a()));
                        m.insert("b".into(), num(iv.b()));
                        Value::Object(m)
                    }
                    Cell::NoInterval | Cell::Empty => Value::Null,
                };
                ((*k).to_owned(), v)
            })
            .collect()
    }

    fn csv_header(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.cells.len() + 1);
        for (k, c) in &self.cells {
            match c {
                Cell::Interval(_) | Cell::NoInterval => {
                    out.extend(["a".to_owned(), "b".to_owned()])
                }
                _ => out.push((*k).to_owned()),
            }
        }
        out
    }

    fn csv_record(&self) -> Vec<String> {
        let num = |x: f64| format!("{x:.16e}");
        let mut out = Vec::with_capacity(self.cells.len() + 1);
        for (_, c) in &self.cells {
            match c {
                Cell::Text(s) => out.push(s.clone()),
                Cell::Num(x) => out.push(num(*x)),
                Cell::Int(i) => out.push(i.to_string()),
                Cell::Flag(f) => out.push(f.to_string()),
                Cell::Interval(iv) => out.extend([num(iv.a()), num(iv.b())]),
                Cell::NoInterval => out.extend([String::new(), String::new()]),
                Cell::Empty => out.push(String::new()),
            }
        }
        out
    }
}

/// The output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    /// Top-level fields; the whole report for single computations.
    pub head: Row,
    /// Per-item rows of tables, sweeps and composite rules.
    pub rows: Vec<Row>,
    /// JSON key holding `rows`.
    pub rows_key: &'static str,
    pub satisfied: bool,
}

impl Document {
    fn single(head: Row, satisfied: bool) -> Self {
        Self {
            head,
            rows: Vec::new(),
            rows_key: "rows",
            satisfied,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut m = self.head.json();
        if !self.rows.is_empty() {
            let rows = self.rows.iter().map(|r| Value::Object(r.json())).collect();
            m.insert(self.rows_key.to_owned(), Value::Array(rows));
        }
        Value::Object(m)
    }
}

/// Serializes a document. JSON numbers use the shortest round-trip form;
/// CSV numbers carry 17 significant digits. CSV holds the head row for
/// single reports and one row per item otherwise.
pub fn emit_report(doc: &Document, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s =
                serde_json::to_string_pretty(&doc.to_json()).expect("document is valid JSON");
            s.push('\n');
            s
        }
        Format::Csv => {
            let rows: Vec<&Row> = if doc.rows.is_empty() {
                vec![&doc.head]
            } else {
                doc.rows.iter().collect()
            };
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(rows[0].csv_header())
                .expect("in-memory write");
            for r in rows {
                w.write_record(r.csv_record()).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
        }
    }
}

fn provenance_str(p: Provenance) -> &'static str {
    match p {
        Provenance::Analytic => "analytic",
        Provenance::Sampled => "sampled",
    }
}

fn expansion_kind(cfg: &RunConfig) -> Result<ExpansionKind> {
    if let Some(rule) = cfg.rule.as_deref() {
        return match rule {
            "taylor2" => Ok(ExpansionKind::Classical),
            "taylor_like1" => Ok(ExpansionKind::FirstOrder),
            "taylor_like2" => Ok(ExpansionKind::SecondOrder(Variant::Closure)),
            "taylor_like2_open" => Ok(ExpansionKind::SecondOrder(Variant::Open)),
            other => Err(Error::InvalidArgument(format!(
                "unknown expansion rule `{other}`"
            ))),
        };
    }
    match (cfg.order, cfg.variant) {
        (1, _) => Ok(ExpansionKind::FirstOrder),
        (2, VariantArg::Classical) => Ok(ExpansionKind::Classical),
        (2, VariantArg::Closure) => Ok(ExpansionKind::SecondOrder(Variant::Closure)),
        (2, VariantArg::Open) => Ok(ExpansionKind::SecondOrder(Variant::Open)),
        (order, _) => Err(Error::InvalidArgument(format!(
            "--order must be 1 or 2, got {order}"
        ))),
    }
}

fn run_expansion(
    h: &FunctionHandle,
    iv: &Interval,
    kind: ExpansionKind,
    n: usize,
    bounds: &DerivativeBounds,
) -> Result<ExpansionReport> {
    match kind {
        ExpansionKind::Classical => expand_classical(h, iv, bounds),
        ExpansionKind::FirstOrder => expand_first_order(h, iv, n, bounds),
        ExpansionKind::SecondOrder(v) => expand_second_order(h, iv, n, bounds, v),
    }
}

fn expand(cfg: &RunConfig) -> Result<Document> {
    let (h, iv) = cfg.target()?;
    let kind = expansion_kind(cfg)?;
    let bounds = DerivativeBounds::estimate(&h, &iv, BOUNDS_GRID)?;
    let r = run_expansion(&h, &iv, kind, cfg.n, &bounds)?.with_tolerance(cfg.tolerance);
    let head = Row::default()
        .with("command", "expand")
        .with("function", h.spec_string())
        .with("interval", iv)
        .with("n", r.n)
        .with("rule", kind.rule_name())
        .with("order", usize::from(r.order))
        .with("estimate", r.estimate)
        .with("truth", r.truth)
        .with("abs_error", r.actual_error.abs())
        .with("bound_lo", r.remainder_lo)
        .with("bound_hi", r.remainder_hi)
        .with("satisfied", r.satisfied)
        .with("remainder_lo", r.remainder_lo)
        .with("remainder_hi", r.remainder_hi)
        .with("actual_error", r.actual_error)
        .with("lambda1", r.lambda1)
        .with("lambda2", r.lambda2)
        .with("provenance", provenance_str(bounds.provenance))
        .with("tolerance", cfg.tolerance);
    Ok(Document::single(head, r.satisfied))
}

/// Max of |f - approx| over `points` equispaced points and where it occurs.
fn max_error(
    h: &FunctionHandle,
    iv: &Interval,
    points: usize,
    approx: impl Fn(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let mut worst = (0.0, iv.a());
    for x in iv.grid(points) {
        let e = (h.value(x)? - approx(x)?).abs();
        if e > worst.0 {
            worst = (e, x);
        }
    }
    Ok(worst)
}

/// Interpolation check slack: the suite tolerance plus 1e-9 relative.
fn interp_satisfied(err: f64, bound: f64, tol: f64) -> bool {
    err <= bound + tol + 1e-9 * bound.abs()
}

struct InterpOutcome {
    rule: &'static str,
    max_error: f64,
    argmax: f64,
    bound: f64,
    bounds: (f64, f64, f64, Option<f64>),
    satisfied: bool,
}

fn run_interp(
    h: &FunctionHandle,
    iv: &Interval,
    corrected: bool,
    variant: SignVariant,
    grid: usize,
    tol: f64,
) -> Result<InterpOutcome> {
    let bounds = DerivativeBounds::estimate(h, iv, BOUNDS_GRID)?;
    let (sup, osc) = p2_error_bounds(&bounds, iv)?;
    let corr = corrected_bound(&bounds, iv)?;
    let cubic = cubic_lagrange_bound(&bounds, iv).ok();
    let (max_error, argmax, bound, rule) = if corrected {
        let (e, x) = max_error(h, iv, grid, |x| {
            corrected_interpolant_with(h, iv, x, variant)
        })?;
        (e, x, corr, "p2_corrected")
    } else {
        let (fa, fb, fc) = (h.value(iv.a())?, h.value(iv.b())?, h.value(iv.c())?);
        let (e, x) = max_error(h, iv, grid, |x| p2_interpolate(fa, fb, fc, iv, x))?;
        (e, x, osc, "p2")
    };
    Ok(InterpOutcome {
        rule,
        max_error,
        argmax,
        bound,
        bounds: (sup, osc, corr, cubic),
        satisfied: interp_satisfied(max_error, bound, tol),
    })
}

fn interp(cfg: &RunConfig) -> Result<Document> {
    let (h, iv) = cfg.target()?;
    let corrected = match cfg.rule.as_deref().unwrap_or("p2_corrected") {
        "p2" => false,
        "p2_corrected" => true,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown interpolation rule `{other}`"
            )))
        }
    };
    let o = run_interp(
        &h,
        &iv,
        corrected,
        cfg.sign_variant,
        cfg.grid,
        cfg.tolerance,
    )?;
    let (sup, osc, corr, cubic) = o.bounds;
    let head = Row::default()
        .with("command", "interp")
        .with("function", h.spec_string())
        .with("interval", iv)
        .with("grid", cfg.grid)
        .with("rule", o.rule)
        .with(
            "sign_variant",
            if corrected {
                Cell::from(cfg.sign_variant.as_str())
            } else {
                Cell::Empty
            },
        )
        .with("abs_error", o.max_error)
        .with("bound", o.bound)
        .with("satisfied", o.satisfied)
        .with("argmax", o.argmax)
        .with("bound_sup", sup)
        .with("bound_osc", osc)
        .with("bound_corrected", corr)
        .with("bound_cubic", cubic);
    Ok(Document::single(head, o.satisfied))
}

fn quad_row(command: &'static str, h: &FunctionHandle, r: &QuadratureReport) -> Row {
    Row::default()
        .with("command", command)
        .with("function", h.spec_string())
        .with("interval", r.interval)
        .with("panels", r.panels)
        .with("rule", r.rule.as_str())
        .with("mode", r.mode.map_or(Cell::Empty, |m| m.as_str().into()))
        .with(
            "sign_variant",
            r.sign_variant.map_or(Cell::Empty, |s| s.as_str().into()),
        )
        .with("value", r.value)
        .with("oracle", r.oracle)
        .with("abs_error", r.abs_error)
        .with("bound", r.bound)
        .with("bound_id", r.bound_id.as_str())
        .with("satisfied", r.satisfied)
}

fn pattern_str(variant: SignVariant) -> String {
    let p = quadrature::pattern_for(variant);
    let first = match p.first {
        FirstSign::Plus => "plus",
        FirstSign::Minus => "minus",
    };
    let second = match p.second {
        SecondCorrection::Printed => "printed",
        SecondCorrection::Derived => "derived",
    };
    format!("{first}_{second}")
}

/// Sign-resolution metadata attached to corrected-rule reports.
fn with_sign_metadata(row: Row, rule: Rule, variant: SignVariant) -> Row {
    if rule != Rule::CorrectedSimpson {
        return row;
    }
    let r = resolve_sign_pattern();
    row.with("sign_pattern", pattern_str(variant))
        .with("cubic_exact_patterns", r.cubic_exact_count)
        .with("tie_broken", r.tie_broken)
}

fn quad(cfg: &RunConfig) -> Result<Document> {
    let (h, iv) = cfg.target()?;
    let rule = parse_quad_rule(cfg.rule.as_deref().unwrap_or("simpson"))?;
    let options = cfg.rule_options();
    let tol = cfg.tolerance;

    if !cfg.sweep.is_empty() {
        let sweep = composite_sweep(&h, &iv, rule, &cfg.sweep, options)?;
        let reports: Vec<QuadratureReport> = sweep
            .reports
            .iter()
            .map(|r| r.with_tolerance(tol))
            .collect();
        let satisfied = reports.iter().all(|r| r.satisfied);
        let head = Row::default()
            .with("command", "quad")
            .with("function", h.spec_string())
            .with("interval", iv)
            .with("rule", rule.as_str())
            .with("bound_id", reports[0].bound_id.as_str())
            .with("empirical_order", sweep.empirical_order)
            .with("satisfied", satisfied);
        let head = with_sign_metadata(head, rule, cfg.sign_variant);
        let rows = reports.iter().map(|r| quad_row("quad", &h, r)).collect();
        return Ok(Document {
            head,
            rows,
            rows_key: "sweep",
            satisfied,
        });
    }

    if cfg.panels > 1 {
        let c = composite(&h, &iv, rule, cfg.panels, options)?;
        let total = c.total.with_tolerance(tol);
        let pieces: Vec<QuadratureReport> =
            c.pieces.iter().map(|r| r.with_tolerance(tol)).collect();
        let satisfied = total.satisfied && pieces.iter().all(|r| r.satisfied);
        let head = with_sign_metadata(quad_row("quad", &h, &total), rule, cfg.sign_variant);
        let rows = pieces.iter().map(|r| quad_row("quad", &h, r)).collect();
        return Ok(Document {
            head,
            rows,
            rows_key: "panels",
            satisfied,
        });
    }

    let bounds = DerivativeBounds::estimate(&h, &iv, BOUNDS_GRID)?;
    let r = quad_report(&h, &iv, rule, &bounds, options)?.with_tolerance(tol);
    let head = with_sign_metadata(quad_row("quad", &h, &r), rule, cfg.sign_variant)
        .with("provenance", provenance_str(bounds.provenance))
        .with("tolerance", tol);
    Ok(Document::single(head, r.satisfied))
}

/// Uniform row of the `bench` and `verify` tables.
#[derive(Debug, Clone, PartialEq)]
struct Entry {
    section: &'static str,
    function: String,
    interval: Option<Interval>,
    n: Option<usize>,
    rule: String,
    mode: Option<Mode>,
    sign_variant: Option<SignVariant>,
    estimate: Option<f64>,
    reference: Option<f64>,
    abs_error: Option<f64>,
    bound_lo: Option<f64>,
    bound_hi: Option<f64>,
    ratio: Option<f64>,
    satisfied: bool,
}

impl Entry {
    fn new(
        section: &'static str,
        function: impl Into<String>,
        interval: Option<Interval>,
        rule: impl Into<String>,
    ) -> Self {
        Self {
            section,
            function: function.into(),
            interval,
            n: None,
            rule: rule.into(),
            mode: None,
            sign_variant: None,
            estimate: None,
            reference: None,
            abs_error: None,
            bound_lo: None,
            bound_hi: None,
            ratio: None,
            satisfied: true,
        }
    }

    fn expansion(h: &FunctionHandle, iv: &Interval, r: &ExpansionReport) -> Self {
        Self {
            n: Some(r.n),
            estimate: Some(r.estimate),
            reference: Some(r.truth),
            abs_error: Some(r.actual_error.abs()),
            bound_lo: Some(r.remainder_lo),
            bound_hi: Some(r.remainder_hi),
            satisfied: r.satisfied,
            ..Entry::new("expansion", h.spec_string(), Some(*iv), r.kind.rule_name())
        }
    }

    fn quadrature(h: &FunctionHandle, r: &QuadratureReport) -> Self {
        Self {
            mode: r.mode,
            sign_variant: r.sign_variant,
            estimate: Some(r.value),
            reference: Some(r.oracle),
            abs_error: Some(r.abs_error),
            bound_hi: Some(r.bound),
            satisfied: r.satisfied,
            ..Entry::new(
                "quadrature",
                h.spec_string(),
                Some(r.interval),
                format!("{}/{}", r.rule.as_str(), r.bound_id),
            )
        }
    }

    fn interpolation(
        h: &FunctionHandle,
        iv: &Interval,
        o: &InterpOutcome,
        variant: Option<SignVariant>,
    ) -> Self {
        Self {
            sign_variant: variant,
            abs_error: Some(o.max_error),
            bound_hi: Some(o.bound),
            satisfied: o.satisfied,
            ..Entry::new("interpolation", h.spec_string(), Some(*iv), o.rule)
        }
    }

    fn row(&self, command: &'static str) -> Row {
        Row::default()
            .with("command", command)
            .with("section", self.section)
            .with("function", self.function.as_str())
            .with(
                "interval",
                self.interval.map_or(Cell::NoInterval, Cell::Interval),
            )
            .with("n", self.n.map_or(Cell::Empty, Cell::from))
            .with("rule", self.rule.as_str())
            .with("mode", self.mode.map_or(Cell::Empty, |m| m.as_str().into()))
            .with(
                "sign_variant",
                self.sign_variant.map_or(Cell::Empty, |s| s.as_str().into()),
            )
            .with("estimate", self.estimate)
            .with("reference", self.reference)
            .with("abs_error", self.abs_error)
            .with("bound_lo", self.bound_lo)
            .with("bound_hi", self.bound_hi)
            .with("ratio", self.ratio)
            .with("satisfied", self.satisfied)
    }
}

fn table(command: Command, entries: Vec<Entry>, head: Row) -> Document {
    let satisfied = entries.iter().all(|e| e.satisfied);
    let name = command.as_str();
    Document {
        head: head
            .with("satisfied", satisfied)
            .with("rows_total", entries.len()),
        rows: entries.iter().map(|e| e.row(name)).collect(),
        rows_key: "rows",
        satisfied,
    }
}

fn battery() -> Result<Vec<(FunctionHandle, Interval)>> {
    BATTERY
        .iter()
        .map(|&(spec, a, b)| Ok((FunctionHandle::parse(spec)?, Interval::new(a, b)?)))
        .collect()
}

/// Bound for the corrected rule in the tables: `lipschitz_bis` in centred
/// coordinates, or the power surrogate when f''' is not Lipschitz.
fn corrected_bound_id(bounds: &DerivativeBounds) -> BoundId {
    if bounds.lipschitz3.is_some() {
        BoundId::LipschitzBis
    } else {
        BoundId::PowSurrogate
    }
}

/// Classical-vs-optimized expansions, P2 vs corrected interpolation,
/// Simpson vs corrected Simpson vs Cheng–Sun, and the constant ratios.
fn bench(cfg: &RunConfig) -> Result<Document> {
    let tol = cfg.tolerance;
    let mut entries = Vec::new();
    for (h, iv) in battery()? {
        let bounds = DerivativeBounds::estimate(&h, &iv, BOUNDS_GRID)?;

        let classical = expand_classical(&h, &iv, &bounds)?.with_tolerance(tol);
        entries.push(Entry {
            ratio: Some(1.0),
            ..Entry::expansion(&h, &iv, &classical)
        });
        for n in [1, 2, 4] {
            let r = expand_second_order(&h, &iv, n, &bounds, Variant::Closure)?.with_tolerance(tol);
            entries.push(Entry {
                ratio: Some(classical.half_width() / r.half_width()),
                ..Entry::expansion(&h, &iv, &r)
            });
        }

        let p2 = run_interp(&h, &iv, false, SignVariant::Validated, cfg.grid, tol)?;
        entries.push(Entry {
            ratio: Some(1.0),
            ..Entry::interpolation(&h, &iv, &p2, None)
        });
        let star = run_interp(&h, &iv, true, SignVariant::Validated, cfg.grid, tol)?;
        entries.push(Entry {
            ratio: Some(p2.bound / star.bound),
            ..Entry::interpolation(&h, &iv, &star, Some(SignVariant::Validated))
        });

        let mut simpson_bound = None;
        for (rule, id) in [
            (Rule::Simpson, BoundId::C3Osc),
            (Rule::CorrectedSimpson, corrected_bound_id(&bounds)),
            (Rule::ChengSun, BoundId::ChengSun),
        ] {
            let options = RuleOptions {
                bound_id: Some(id),
                ..Default::default()
            };
            let r = quad_report(&h, &iv, rule, &bounds, options)?.with_tolerance(tol);
            let base = *simpson_bound.get_or_insert(r.bound);
            entries.push(Entry {
                ratio: Some(base / r.bound),
                ..Entry::quadrature(&h, &r)
            });
        }
    }
    entries.extend(constant_ratios()?);
    let head = Row::default()
        .with("command", "bench")
        .with("tolerance", tol);
    Ok(table(Command::Bench, entries, head))
}

/// The headline constant ratios, computed from the bound routines with unit
/// derivative data.
fn constant_ratios() -> Result<Vec<Entry>> {
    let unit = Interval::new(0.0, 1.0)?;
    let symmetric = DerivativeBounds::default().with_third(-1.0, 1.0)?;
    let mut out = Vec::new();
    for n in [1usize, 2, 4] {
        let (lo, hi) = envelope_second_order(&symmetric, &unit, n, Variant::Closure)?;
        let ratio = classical_symmetric_bound(&symmetric, &unit)? / (0.5 * (hi - lo));
        let expected = 16.0 * (n * n) as f64 / 3.0;
        out.push(Entry {
            n: Some(n),
            ratio: Some(ratio),
            reference: Some(expected),
            satisfied: (ratio - expected).abs() <= 1e-12 * expected,
            ..Entry::new("constant", "m3=-M3", None, "taylor2/taylor_like2")
        });
    }

    let third = DerivativeBounds::default()
        .with_third(0.0, 0.5)?
        .with_fourth(-1.0, 1.0)?;
    let ratio = cubic_lagrange_bound(&third, &unit)? / corrected_bound(&third, &unit)?;
    out.push(Entry {
        ratio: Some(ratio),
        reference: Some(2.053),
        satisfied: (ratio - 2.053).abs() <= 1e-3,
        ..Entry::new("constant", "unit", None, "p3/p2_corrected")
    });

    let oscillating = DerivativeBounds::default().with_third(0.0, 1.0)?;
    let lipschitz = DerivativeBounds::default()
        .with_third(0.0, 0.0)?
        .with_lipschitz(1.0)?;
    let ratio = quad_bound(BoundId::ChengSun, &unit, &oscillating)?
        / quad_bound(BoundId::LipschitzBis, &unit.centered(), &lipschitz)?;
    out.push(Entry {
        ratio: Some(ratio),
        reference: Some(4.0 / 3.0),
        satisfied: (ratio - 4.0 / 3.0).abs() <= 1e-12,
        ..Entry::new("constant", "unit", None, "cheng_sun/lipschitz_bis")
    });
    Ok(out)
}

/// Random interval with `a < 0 < b` inside [-2, 2] and width in [0.5, 3].
pub fn random_straddling_interval(rng: &mut ChaCha8Rng) -> Interval {
    loop {
        let w: f64 = rng.gen_range(0.5..=3.0);
        let lo = (-2.0f64).max(-w);
        let hi = 0.0f64.min(2.0 - w);
        let a = rng.gen_range(lo..hi);
        let b = a + w;
        if a < 0.0 && b > 0.0 && b <= 2.0 {
            return Interval::new(a, b).expect("finite ordered endpoints");
        }
    }
}

fn verify(cfg: &RunConfig) -> Result<Document> {
    let tol = cfg.tolerance;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut entries = Vec::new();

    for (h, iv) in battery()? {
        let bounds = DerivativeBounds::estimate(&h, &iv, BOUNDS_GRID)?;
        entries.push(Entry::expansion(
            &h,
            &iv,
            &expand_classical(&h, &iv, &bounds)?.with_tolerance(tol),
        ));
        for n in 1..=8 {
            for kind in [
                ExpansionKind::FirstOrder,
                ExpansionKind::SecondOrder(Variant::Closure),
                ExpansionKind::SecondOrder(Variant::Open),
            ] {
                let r = run_expansion(&h, &iv, kind, n, &bounds)?.with_tolerance(tol);
                entries.push(Entry::expansion(&h, &iv, &r));
            }
        }
    }

    for _ in 0..RANDOM_CUBICS {
        let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-3.0..=3.0));
        let a: f64 = rng.gen_range(-2.0..=2.0);
        let iv = Interval::new(a, a + rng.gen_range(0.1..=2.0))?;
        let h = FunctionHandle::parse(&format!(
            "cubic:c3={},c2={},c1={},c0={}",
            c[0], c[1], c[2], c[3]
        ))?;
        let bounds = DerivativeBounds::estimate(&h, &iv, BOUNDS_GRID)?;
        for n in [1, 2, 4, 8] {
            let r = expand_second_order(&h, &iv, n, &bounds, Variant::Closure)?;
            let predicted = iv.width().powi(3) * 6.0 * c[0] / (96.0 * (n * n) as f64);
            entries.push(Entry {
                section: "constant_third",
                bound_lo: Some(predicted),
                bound_hi: Some(predicted),
                satisfied: (r.actual_error - predicted).abs() <= 1e-10 * r.truth.abs().max(1.0),
                ..Entry::expansion(&h, &iv, &r)
            });
        }
    }

    for (h, iv) in battery()? {
        let p2 = run_interp(&h, &iv, false, SignVariant::Validated, cfg.grid, tol)?;
        entries.push(Entry::interpolation(&h, &iv, &p2, None));
        let star = run_interp(&h, &iv, true, SignVariant::Validated, cfg.grid, tol)?;
        entries.push(Entry::interpolation(
            &h,
            &iv,
            &star,
            Some(SignVariant::Validated),
        ));
    }

    for (h, iv) in battery()? {
        let bounds = DerivativeBounds::estimate(&h, &iv, BOUNDS_GRID)?;
        for (rule, id) in [
            (Rule::Simpson, BoundId::C3Sup),
            (Rule::Simpson, BoundId::C3Osc),
            (Rule::ChengSun, BoundId::ChengSun),
        ] {
            let options = RuleOptions {
                bound_id: Some(id),
                ..Default::default()
            };
            entries.push(Entry::quadrature(
                &h,
                &quad_report(&h, &iv, rule, &bounds, options)?.with_tolerance(tol),
            ));
        }
    }

    for spec in CORRECTED_FAMILY {
        let h = FunctionHandle::parse(spec)?;
        for _ in 0..RANDOM_INTERVALS {
            let iv = random_straddling_interval(&mut rng);
            let bounds = DerivativeBounds::estimate(&h, &iv, BOUNDS_GRID)?;
            for mode in [Mode::Shifted, Mode::Literal] {
                let options = RuleOptions {
                    mode,
                    bound_id: Some(BoundId::LipschitzBis),
                    ..Default::default()
                };
                let r = quad_report(&h, &iv, Rule::CorrectedSimpson, &bounds, options)?
                    .with_tolerance(tol);
                entries.push(Entry::quadrature(&h, &r));
            }
        }
    }

    for p in [3.25, 3.5, 3.75] {
        let h = FunctionHandle::parse(&format!("pow:p={p},a0=-1"))?;
        let iv = Interval::new(-1.0, 1.0)?;
        let bounds = DerivativeBounds::estimate(&h, &iv, BOUNDS_GRID)?;
        let options = RuleOptions {
            bound_id: Some(BoundId::PowSurrogate),
            ..Default::default()
        };
        let r = quad_report(&h, &iv, Rule::CorrectedSimpson, &bounds, options)?.with_tolerance(tol);
        debug_assert_eq!(r.bound, power_surrogate_bound(p, &iv)?);
        entries.push(Entry::quadrature(&h, &r));
    }

    for (spec, a, b, exact) in [
        ("pow:p=4,a0=0", 0.0, 1.0, 0.2),
        ("log1p", 0.0, 1.0, 2.0 * std::f64::consts::LN_2 - 1.0),
        ("pow:p=3.5,a0=-1", -1.0, 1.0, 2f64.powf(4.5) / 4.5),
    ] {
        let h = FunctionHandle::parse(spec)?;
        let iv = Interval::new(a, b)?;
        let value = reference_integral(&h, &iv, 1e-13)?;
        let err = (value - exact).abs();
        entries.push(Entry {
            estimate: Some(value),
            reference: Some(exact),
            abs_error: Some(err),
            bound_hi: Some(1e-11),
            satisfied: err <= 1e-11,
            ..Entry::new("oracle", h.spec_string(), Some(iv), "reference_integral")
        });
    }

    let resolution = resolve_sign_pattern();
    let head = Row::default()
        .with("command", "verify")
        .with("seed", cfg.seed as usize)
        .with("tolerance", tol)
        .with("sign_pattern", pattern_str(SignVariant::Validated))
        .with("cubic_exact_patterns", resolution.cubic_exact_count)
        .with("tie_broken", resolution.tie_broken);
    Ok(table(Command::Verify, entries, head))
}

/// Runs the command described by `cfg`.
pub fn execute(cfg: &RunConfig) -> Result<Document> {
    match cfg.command {
        Command::Expand => expand(cfg),
        Command::Interp => interp(cfg),
        Command::Quad => quad(cfg),
        Command::Bench => bench(cfg),
        Command::Verify => verify(cfg),
    }
}

/// Runs `cfg`, writes the report to `out`, and returns the exit code.
pub fn dispatch(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(cfg) {
        Ok(doc) => {
            if let Err(e) = out.write_all(emit_report(&doc, cfg.format).as_bytes()) {
                let _ = writeln!(err, "error: cannot write report: {e}");
                return 2;
            }
            if doc.satisfied {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

/// Entry point shared by the binary and the tests.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(args) => args,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let rendered = e.to_string();
                    let _ = writeln!(
                        err,
                        "{}",
                        rendered.lines().next().unwrap_or("error: bad arguments")
                    );
                    2
                }
            };
        }
    };
    let cfg = tolerance_from(std::env::var(TOLERANCE_ENV).ok().as_deref())
        .and_then(|tol| RunConfig::from_args(args, tol));
    match cfg {
        Ok(cfg) => dispatch(&cfg, out, err),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
