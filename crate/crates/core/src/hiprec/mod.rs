//! Extended-precision real and complex scalars.
//!
//! [`Dd`] is an unevaluated sum of 2 binary64 components (~31 digits),
//! [`Qd`] of 4 components (~63 digits).  Components are kept renormalized:
//! non-overlapping and decreasing in magnitude after every public operation.
//!
//! Error policy: the arithmetic operators follow IEEE semantics and poison
//! the result with NaN components on invalid input (0/0, sqrt of a negative,
//! ...).  The `checked_*` methods and [`Scalar::checked_div`] are the
//! boundary where such values surface as [`HiprecError`]; nothing here
//! panics on numeric input.

mod complex;
mod consts;
mod convert;
mod dd;
mod eft;
mod qd;
mod scalar;

pub use complex::Cx;
pub use consts::{ln2_rational, pi_rational};
pub use convert::{parse_decimal_rational, rational_to_f64_nearest};
pub use dd::Dd;
pub use qd::Qd;
pub use scalar::Scalar;

/// Errors surfaced by extended-precision operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HiprecError {
    #[error("division by exact zero")]
    DivisionByZero,
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("non-finite value")]
    NonFinite,
    #[error("parse error: {0}")]
    Parse(String),
}
