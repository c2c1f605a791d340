//! Slow-manifold series of the canonical family in the normal-form (tilde)
//! coordinates, exact in rationals.
//!
//! The graph `(y2, z2) = M(x2, eps)` invariant under
//!
//! ```text
//! x2. = eta Q(x2 - eta z2),  y2. = z2,  z2. = -y2 + Q(x2 - eta z2),   eta = eps^(kappa-1)
//! ```
//!
//! is solved order by order in eta (it starts at the critical manifold
//! `y2 = Q(x2)`), then pushed through the normal-form transformation
//!
//! ```text
//! x~ = x2 + eta^2 Q'(x2) y2
//! y~ = y2 - Q(x2) + (eta/2) Q'(x2) z2
//! z~ = z2 - eta Q'(x2) Q(x2)
//! ```
//!
//! with an exact formal inversion of the x-component.  In the tilde chart
//! the series starts at order `2(kappa-1)` in eps; that cancellation is
//! asserted, not assumed.

use super::polyser::*;
use crate::hiprec::Scalar;
use crate::poly::PolyQ;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Coefficients `m_(2,alpha)(x)` of the tilde-chart slow-manifold series,
/// indexed by the eps power alpha; zero below `2(kappa-1)` and at alpha not
/// divisible by `kappa-1` (the canonical family only carries powers of eta).
#[derive(Debug, Clone)]
pub struct SlowManifoldSeries {
    pub kappa: usize,
    /// Truncation order in eps (inclusive).
    pub order: usize,
    pub y: Vec<RatPoly>,
    pub z: Vec<RatPoly>,
}

impl SlowManifoldSeries {
    pub fn coeff(&self, alpha: usize) -> (&RatPoly, &RatPoly) {
        (&self.y[alpha], &self.z[alpha])
    }

    /// Evaluates the truncated graph at numeric (x~, eps).
    pub fn eval<T: Scalar>(&self, x: T, eps: T) -> (T, T) {
        let mut ay = T::zero();
        let mut az = T::zero();
        for alpha in (0..=self.order).rev() {
            ay = ay * eps + p_eval(&self.y[alpha], x);
            az = az * eps + p_eval(&self.z[alpha], x);
        }
        (ay, az)
    }

    /// Evaluates d/dx of the truncated graph at numeric (x~, eps).
    pub fn eval_deriv<T: Scalar>(&self, x: T, eps: T) -> (T, T) {
        let mut ay = T::zero();
        let mut az = T::zero();
        for alpha in (0..=self.order).rev() {
            ay = ay * eps + p_eval(&p_diff(&self.y[alpha]), x);
            az = az * eps + p_eval(&p_diff(&self.z[alpha]), x);
        }
        (ay, az)
    }
}

fn q_poly(q: &PolyQ) -> RatPoly {
    let mut p: RatPoly = q.coeffs().to_vec();
    p.push(-BigRational::one());
    p
}

/// Invariant graph of the untransformed system as a series in eta.
fn untransformed_series(qp: &RatPoly, trunc: usize) -> (PolySeries, PolySeries) {
    let mut y: PolySeries = ps_new(trunc);
    let mut z: PolySeries = ps_new(trunc);
    y[0] = qp.clone();

    for beta in 1..=trunc {
        // A = Q(x - eta M_z) to order beta, using z up to beta-1.
        let w = ps_sub(&ps_x(beta), &ps_shift(&z, 1, beta));
        let a = p_compose_series(qp, &w, beta);
        // Z_beta = sum_(i+j=beta-1) A_i Y'_j
        let mut zb = p_zero();
        for i in 0..beta {
            let j = beta - 1 - i;
            if !p_is_zero(&a[i]) {
                zb = p_add(&zb, &p_mul(&a[i], &p_diff(&y[j])));
            }
        }
        z[beta] = zb;
        // Y_beta = A_beta - sum_(i+j=beta-1) A_i Z'_j
        let mut yb = a[beta].clone();
        for i in 0..beta {
            let j = beta - 1 - i;
            if !p_is_zero(&a[i]) {
                yb = p_sub(&yb, &p_mul(&a[i], &p_diff(&z[j])));
            }
        }
        y[beta] = yb;
    }
    (y, z)
}

/// Computes the tilde-chart slow-manifold series to eps-order `order`.
///
/// Panics if `order < 2(kappa-1)` (nothing to compute below the first term).
pub fn slow_manifold_series(q: &PolyQ, order: usize) -> SlowManifoldSeries {
    let kappa = q.kappa();
    let km1 = kappa - 1;
    assert!(
        order >= 2 * km1,
        "order {order} below the leading term 2(kappa-1) = {}",
        2 * km1
    );
    let trunc = order / km1; // eta-order
    let qp = q_poly(q);
    let dqp = p_diff(&qp);

    let (y, z) = untransformed_series(&qp, trunc);

    // Tilde components as functions of the original x.
    let half = BigRational::new(1.into(), 2.into());
    let y_tilde = {
        let corr = ps_shift(
            &ps_mul(&ps_of_poly(&p_scale(&dqp, &half), trunc), &z, trunc),
            1,
            trunc,
        );
        ps_add(&ps_sub(&y, &ps_of_poly(&qp, trunc)), &corr)
    };
    let z_tilde = {
        let corr = ps_shift(&ps_of_poly(&p_mul(&dqp, &qp), trunc), 1, trunc);
        ps_sub(&z, &corr)
    };
    // x~ = x + eta^2 Q'(x) Y(x):  invert formally (correction has valuation 2).
    let x_delta = ps_shift(&ps_mul(&ps_of_poly(&dqp, trunc), &y, trunc), 2, trunc);
    let mut xi = ps_x(trunc);
    for _ in 0..(trunc / 2 + 2) {
        xi = ps_sub(&ps_x(trunc), &ps_compose_series(&x_delta, &xi, trunc));
    }
    let my = ps_compose_series(&y_tilde, &xi, trunc);
    let mz = ps_compose_series(&z_tilde, &xi, trunc);

    // The tilde series must start at eta^2 = eps^(2(kappa-1)).
    for beta in 0..2.min(trunc + 1) {
        assert!(
            p_is_zero(&my[beta]) && p_is_zero(&mz[beta]),
            "tilde series has a nonzero term at eta^{beta}"
        );
    }

    let mut out_y = vec![p_zero(); order + 1];
    let mut out_z = vec![p_zero(); order + 1];
    for beta in 0..=trunc {
        let alpha = beta * km1;
        if alpha <= order {
            out_y[alpha] = my[beta].clone();
            out_z[alpha] = mz[beta].clone();
        }
    }
    SlowManifoldSeries {
        kappa,
        order,
        y: out_y,
        z: out_z,
    }
}

/// Independent oracle for the series head: the unperturbed (eps = 0)
/// invariant manifold of the x-chart in tilde coordinates,
/// `(y~, z~) = x~^kappa psi~(x~)`, through order `n` of psi~.
///
/// Built by pushing the inner series through the eps = 0 normal-form map
/// `x~ = x - k x^(k-1) y`, `y~ = y + x^k - (k/2) x^(k-1) z`,
/// `z~ = z - k x^(2k-1)` and re-expanding in x~.  Consistency relation under
/// test: the top-degree coefficient of `m_(2,alpha)` equals `psi~_alpha`.
pub fn unperturbed_tilde_series(kappa: usize, n: usize) -> (Vec<BigRational>, Vec<BigRational>) {
    let deg = kappa + n; // work to x^deg inclusive
    let t_mul = |a: &RatPoly, b: &RatPoly| -> RatPoly {
        let mut out = vec![BigRational::zero(); deg + 1];
        for (i, ai) in a.iter().enumerate().take(deg + 1) {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate().take(deg + 1 - i) {
                if !bj.is_zero() {
                    out[i + j] += ai * bj;
                }
            }
        }
        out
    };
    let t_compose = |p: &RatPoly, xi: &RatPoly| -> RatPoly {
        let mut acc = vec![BigRational::zero(); deg + 1];
        for c in p.iter().rev().take(deg + 1) {
            acc = t_mul(&acc, xi);
            acc[0] += c;
        }
        acc
    };

    let km1 = kappa - 1;
    let phi = super::inner::phi_coefficients(kappa, n / km1 + 2);
    // y(x) = x^k phi_y(x^(k-1)), z(x) likewise, to degree `deg`.
    let mut yx = vec![BigRational::zero(); deg + 1];
    let mut zx = vec![BigRational::zero(); deg + 1];
    for (m, (ym, zm)) in phi.y.iter().zip(&phi.z).enumerate() {
        let d = kappa + m * km1;
        if d <= deg {
            yx[d] = ym.clone();
            zx[d] = zm.clone();
        }
    }
    // Tilde images as series in x.
    let mono = |d: usize, c: i64| -> RatPoly {
        let mut p = vec![BigRational::zero(); deg + 1];
        if d <= deg {
            p[d] = BigRational::from_integer(c.into());
        }
        p
    };
    let kq = kappa as i64;
    let xt = {
        // x - k x^(k-1) y
        let mut p = mono(1, 1);
        let t = t_mul(&mono(km1, kq), &yx);
        for i in 0..=deg {
            p[i] -= &t[i];
        }
        p
    };
    let yt = {
        // y + x^k - (k/2) x^(k-1) z
        let mut p = yx.clone();
        p[kappa] += BigRational::one();
        let t = t_mul(&mono(km1, kq), &zx);
        let half = BigRational::new(1.into(), 2.into());
        for i in 0..=deg {
            p[i] -= &half * &t[i];
        }
        p
    };
    let zt = {
        // z - k x^(2k-1)
        let mut p = zx.clone();
        if 2 * kappa - 1 <= deg {
            p[2 * kappa - 1] -= BigRational::from_integer(kq.into());
        }
        p
    };
    // Invert xt(x): xi(x~) with x = x~ + correction of valuation >= 2k-1.
    let mut xi = mono(1, 1);
    for _ in 0..(deg / (2 * kappa - 2) + 2) {
        // xi = x~ - (xt(xi) - xi)  <=>  xi = x~ + k xi^(k-1) y(xi)
        let xt_of_xi = t_compose(&xt, &xi);
        let mut next = mono(1, 1);
        for i in 0..=deg {
            let corr = &xi[i] - &xt_of_xi[i];
            next[i] += corr;
        }
        xi = next;
    }
    let y_of = t_compose(&yt, &xi);
    let z_of = t_compose(&zt, &xi);
    // psi~_beta = coefficient of x~^(kappa+beta).
    let mut py = vec![BigRational::zero(); n + 1];
    let mut pz = vec![BigRational::zero(); n + 1];
    for beta in 0..=n {
        py[beta] = y_of[kappa + beta].clone();
        pz[beta] = z_of[kappa + beta].clone();
    }
    // Everything below x^kappa must have cancelled.
    for (i, c) in y_of.iter().take(kappa).enumerate() {
        assert!(c.is_zero(), "y~ has residue at x^{i}");
    }
    for (i, c) in z_of.iter().take(kappa).enumerate() {
        assert!(c.is_zero(), "z~ has residue at x^{i}");
    }
    (py, pz)
}
