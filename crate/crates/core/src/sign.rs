use serde::{Deserialize, Serialize};

/// Which sign pattern a corrected formula uses for its correction terms.
///
/// `Paper` evaluates the correction exactly as originally printed.
/// `Validated` uses the pattern that passes the exactness and error-bound
/// checks (see `quadrature::resolve_sign_pattern` and
/// `interpolation::corrected_interpolant`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignVariant {
    Paper,
    #[default]
    Validated,
}

impl SignVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            SignVariant::Paper => "paper",
            SignVariant::Validated => "validated",
        }
    }
}
