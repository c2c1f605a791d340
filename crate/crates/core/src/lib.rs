//! Numerical toolkit for the singularly perturbed third-order equation
//! `eps^(2(kappa-1)) f''' + f' = Q(f)`, where `Q` is a real polynomial of
//! degree `kappa >= 2` with simple real roots.
//!
//! The crate computes, for each of the `kappa - 1` heteroclinic connections
//! of the reduced problem `f' = Q(f)`:
//!
//! * the blowup times `T^j` of the imaginary-time flow `x' = iQ(x)`, both by
//!   the residue formula and by direct integration on the Poincare
//!   hemisphere ([`poly`], [`cflow`]),
//! * the separatrix crossing points `p^j` ([`cflow`]),
//! * the divergent inner-series coefficients and their Gevrey growth
//!   diagnostic, plus the slow-manifold series, in exact rational
//!   arithmetic ([`series`]),
//! * the exponentially small splitting `(dy, dz)` of the one-dimensional
//!   invariant manifolds measured on the section `x~ = p^j`, and fits of
//!   the law `|d| = eps^(-3k/2) exp(-eps^(1-k) T^j) (C + O(eps))`
//!   ([`split`]).
//!
//! All floating computations run on extended-precision scalars (double-double
//! or quad-double, [`hiprec`]); everything is generic over the [`Scalar`]
//! trait with the concrete aliases [`Rdd`] and [`Rqd`] below.

pub mod cflow;
pub mod hiprec;
pub mod poly;
pub mod selftest;
pub mod series;
pub mod split;
pub mod taylor;

pub use hiprec::{Cx, Dd, HiprecError, Qd, Scalar};
pub use poly::{PolyError, PolyQ, RootSet};

/// Double-double working real (~31 decimal digits).
pub type Rdd = Dd;
/// Quad-double working real (~63 decimal digits).
pub type Rqd = Qd;
/// Complex value over the double-double real.
pub type Cdd = Cx<Dd>;
/// Complex value over the quad-double real.
pub type Cqd = Cx<Qd>;

/// Runtime-selectable working precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Precision {
    Dd,
    Qd,
}

impl std::str::FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dd" => Ok(Precision::Dd),
            "qd" => Ok(Precision::Qd),
            other => Err(format!("unknown precision {other:?} (expected dd or qd)")),
        }
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Precision::Dd => "dd",
            Precision::Qd => "qd",
        })
    }
}
