//! Sharpened Taylor-like expansions, corrected P2 interpolation and corrected
//! Simpson quadrature, each paired with a computable error envelope.
//!
//! ```
//! use taylor_sharp::{expand_second_order, DerivativeBounds, FunctionHandle, Interval, Variant};
//!
//! let f = FunctionHandle::parse("log1p").unwrap();
//! let iv = Interval::new(0.0, 1.0).unwrap();
//! let bounds = DerivativeBounds::estimate(&f, &iv, 65).unwrap();
//! let r = expand_second_order(&f, &iv, 2, &bounds, Variant::Closure).unwrap();
//! assert!((r.estimate - 1061.0 / 1536.0).abs() < 1e-13);
//! assert!(r.satisfied);
//! ```

pub mod cli;
pub mod error;
pub mod expansion;
pub mod funcspace;
pub mod interpolation;
pub mod quadrature;
pub mod sign;

pub use error::{Error, Result};
pub use expansion::{
    expand_classical, expand_first_order, expand_second_order, ExpansionKind, ExpansionReport,
    Variant,
};
pub use funcspace::{DerivRange, DerivativeBounds, FunctionHandle, Interval, Provenance};
pub use interpolation::{
    corrected_interpolant, interp_report, p2_interpolate, InterpolationReport,
};
pub use quadrature::{
    composite_sweep, corrected_simpson, quad_report, reference_integral, resolve_sign_pattern,
    simpson, BoundId, Mode, QuadratureReport, Rule, RuleOptions,
};
pub use sign::SignVariant;
