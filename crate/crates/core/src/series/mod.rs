//! Formal series in exact rational arithmetic: the inner-series coefficients
//! `phi_alpha = (y_alpha, z_alpha)`, the Gevrey-growth divergence diagnostic,
//! and the slow-manifold series of the canonical family.
//!
//! Floating point corrupts the growth diagnostic beyond alpha ~ 25, so every
//! coefficient here is a `BigRational`; conversions happen only at output.

mod gevrey;
mod inner;
pub mod polyser;
mod slow;

pub use gevrey::{gevrey_diagnostic, least_squares_xy, ln_abs_rational, GevreyError, GevreyReport};
pub use inner::{phi_coefficients, phi_residual_valuation, SeriesPair};
pub use slow::{slow_manifold_series, unperturbed_tilde_series, SlowManifoldSeries};
