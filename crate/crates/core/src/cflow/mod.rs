//! Compactified complex flows `x' = Q(x)` (real time) and `x' = iQ(x)`
//! (imaginary time) on the Poincare hemisphere: equilibria at infinity,
//! separatrix location `p^j`, and blowup times `T^j` by direct integration
//! (the independent oracle for the residue formula).

mod flows;
mod locate;

pub use flows::{
    chart_to_interior, disc_projection, flow_endpoint, interior_to_chart, trace_flow, verify_path,
    Chart, FlowConfig, FlowKind, PathSample, PhasePath, StopRule, Termination,
};
pub use locate::{blowup_time_integrated, locate_pj, SeparatrixResult};

use crate::hiprec::Scalar;
use crate::taylor::TaylorError;

#[derive(Debug, Clone, thiserror::Error)]
pub enum FlowError {
    #[error("integrator: {0}")]
    Taylor(#[from] TaylorError),
    #[error("operation requires a valid root set")]
    NeedValidRoots,
    #[error("separatrix classifier failed: {0}")]
    Classifier(String),
    #[error("tail series not converging at R_esc = {r_esc} (last relative term {last:e}); increase R_esc")]
    TailDivergence { r_esc: f64, last: f64 },
    #[error("blowup-time integration unstable under R_esc doubling (relative drift {0:e})")]
    TailUnstable(f64),
}

/// Which compactified flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    RealFlowE,
    ImagFlowH,
}

/// A hyperbolic saddle on the equator circle of the Poincare hemisphere.
#[derive(Debug, Clone)]
pub struct InfinityEquilibrium<T> {
    pub kind: EquilibriumKind,
    /// 1-based index l in 1..=2(kappa-1).
    pub l: usize,
    /// Equator angle.
    pub theta: T,
    /// (w1-direction, theta-direction) eigenvalues of the desingularized flow.
    pub eigs: (T, T),
}

/// The `2(kappa-1)` equator saddles of each flow.
///
/// Real flow: `theta = pi (l-1)/(kappa-1)`, eigenvalues
/// `((-1)^(l-1), (kappa-1)(-1)^l)`; imaginary flow: angles shifted by
/// `pi/(2(kappa-1))`, eigenvalues `((-1)^l, (kappa-1)(-1)^(l-1))`.
pub fn infinity_equilibria<T: Scalar>(kappa: usize) -> Vec<InfinityEquilibrium<T>> {
    assert!(kappa >= 2);
    let km1 = (kappa - 1) as i64;
    let base = T::pi() * T::from_i64(km1).recip();
    let half = base.mul_pow2(-1);
    let mut out = Vec::with_capacity(4 * (kappa - 1));
    for l in 1..=2 * (kappa - 1) {
        let sign = if l % 2 == 1 { T::one() } else { -T::one() };
        let theta = base * T::from_i64(l as i64 - 1);
        out.push(InfinityEquilibrium {
            kind: EquilibriumKind::RealFlowE,
            l,
            theta,
            eigs: (sign, -sign * T::from_i64(km1)),
        });
        out.push(InfinityEquilibrium {
            kind: EquilibriumKind::ImagFlowH,
            l,
            theta: theta + half,
            eigs: (-sign, sign * T::from_i64(km1)),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hiprec::Qd;
    use num_traits::Zero;

    #[test]
    fn equilibria_angles_kappa2() {
        let eq = infinity_equilibria::<Qd>(2);
        let pi = <Qd as Scalar>::pi();
        let real: Vec<_> = eq
            .iter()
            .filter(|e| e.kind == EquilibriumKind::RealFlowE)
            .collect();
        let imag: Vec<_> = eq
            .iter()
            .filter(|e| e.kind == EquilibriumKind::ImagFlowH)
            .collect();
        assert_eq!(real.len(), 2);
        assert!(real[0].theta.is_zero());
        assert_eq!(real[1].theta, pi);
        assert_eq!(imag[0].theta, pi.mul_pow2(-1));
        assert_eq!(imag[1].theta, pi + pi.mul_pow2(-1));
    }

    #[test]
    fn equilibria_angles_kappa3() {
        let eq = infinity_equilibria::<Qd>(3);
        let pi = <Qd as Scalar>::pi();
        let half_pi = pi.mul_pow2(-1);
        let quarter_pi = pi.mul_pow2(-2);
        for (i, e) in eq
            .iter()
            .filter(|e| e.kind == EquilibriumKind::RealFlowE)
            .enumerate()
        {
            assert_eq!(e.theta, half_pi * Qd::from_f64(i as f64));
        }
        for (i, e) in eq
            .iter()
            .filter(|e| e.kind == EquilibriumKind::ImagFlowH)
            .enumerate()
        {
            assert_eq!(e.theta, half_pi * Qd::from_f64(i as f64) + quarter_pi);
        }
    }

    #[test]
    fn saddles_have_negative_eigenvalue_product() {
        for kappa in 2..=6 {
            for e in infinity_equilibria::<Qd>(kappa) {
                assert!(
                    e.eigs.0 * e.eigs.1 < Qd::ZERO,
                    "l={} kind={:?}",
                    e.l,
                    e.kind
                );
            }
        }
    }
}
