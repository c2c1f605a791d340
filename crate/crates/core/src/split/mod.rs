//! Exponentially small splitting of the one-dimensional invariant manifolds
//! of the canonical slow-fast system
//!
//! ```text
//! x2. = eta Q(x2 - eta z2),   y2. = z2,   z2. = -y2 + Q(x2 - eta z2),
//! ```
//!
//! (`eta = eps^(kappa-1)`, fast time): saddle-foci and their eigendata,
//! shooting of both manifolds to the section `x~ = p^j` in the normal-form
//! coordinates, and the regression for the law
//! `|dy~ + i dz~| = eps^(-3k/2) exp(-eps^(1-k) T^j) (C + O(eps))`.

mod fit;
mod measure;
mod system;

pub use fit::{
    fit_points_public, fit_records, log_grid, sweep_and_fit, FitPoint, FitReport, SweepOpts,
};
pub use measure::{measure_splitting, MeasureOpts, MeasureStatus, SplitRecord};
pub use system::{
    equilibrium, invariance_residual, nft_invert, nft_transform, EquilibriumInfo, FlowSystem,
    ManifoldKind, SlowFast, ThirdOrder,
};

use crate::taylor::TaylorError;

#[derive(Debug, Clone, thiserror::Error)]
pub enum SplitError {
    #[error("integrator: {0}")]
    Taylor(#[from] TaylorError),
    #[error("operation requires a valid root set")]
    NeedValidRoots,
    #[error("index j={j} out of range 1..={max}")]
    IndexRange { j: usize, max: usize },
    #[error("Newton did not converge ({0}); eps may be too large")]
    NewtonFailure(&'static str),
    #[error("no section crossing within the time cap (tau = {0})")]
    NoCrossing(f64),
    #[error("splitting below the precision floor (|d| = {measured:e}, floor = {floor:e})")]
    Underflow { measured: f64, floor: f64 },
    #[error("sweep needs at least 6 grid points (got {0})")]
    GridTooSmall(usize),
    #[error("fit is ill-conditioned: {0}")]
    IllConditioned(&'static str),
}
