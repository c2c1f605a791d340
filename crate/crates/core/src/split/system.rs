//! The canonical slow-fast system, its equilibria and the normal-form
//! (tilde) coordinate change.

use super::SplitError;
use crate::hiprec::{Cx, Scalar};
use crate::poly::{PolyQ, RootSet};
use crate::series::SlowManifoldSeries;
use crate::taylor::{jet, TaylorOde};

/// Fast-time right-hand side
/// `x2. = eta Q(u), y2. = z2, z2. = -y2 + Q(u)` with `u = x2 - eta z2`.
#[derive(Debug, Clone)]
pub struct FlowSystem<T> {
    pub q: PolyQ,
    pub eps: T,
    /// `eta = eps^(kappa-1)`.
    pub eta: T,
}

impl<T: Scalar> FlowSystem<T> {
    pub fn new(q: &PolyQ, eps: T) -> Self {
        let eta = eps.powi(q.kappa() as i32 - 1);
        FlowSystem {
            q: q.clone(),
            eps,
            eta,
        }
    }

    /// Right-hand side at a point (fast time).
    pub fn rhs(&self, x: [T; 3]) -> [T; 3] {
        let u = x[0] - self.eta * x[2];
        let qu = self.q.eval_real(u, 0);
        [self.eta * qu, x[2], -x[1] + qu]
    }

    /// Jacobian of the right-hand side.
    pub fn jacobian(&self, x: [T; 3]) -> [[T; 3]; 3] {
        let u = x[0] - self.eta * x[2];
        let dq = self.q.eval_real(u, 1);
        [
            [self.eta * dq, T::zero(), -self.eta * self.eta * dq],
            [T::zero(), T::zero(), T::one()],
            [dq, -T::one(), -self.eta * dq],
        ]
    }

    /// The equivalent third-order form `eps^(2(k-1)) f''' + f' = Q(f)` in
    /// fast time, state `(f, f', f'')` (derivatives in slow time).
    pub fn third_order_rhs(&self, s: [T; 3]) -> [T; 3] {
        let qf = self.q.eval_real(s[0], 0);
        [self.eta * s[1], self.eta * s[2], (qf - s[1]) / self.eta]
    }

    /// Map a third-order state to `(x2, y2, z2)`:
    /// `x2 = f + eps^(2(k-1)) f''`, `y2 = f'`, `z2 = eps^(k-1) f''`.
    pub fn from_third_order(&self, s: [T; 3]) -> [T; 3] {
        [s[0] + self.eta * self.eta * s[2], s[1], self.eta * s[2]]
    }
}

/// Taylor system for the slow-fast flow; `dir = -1` is exact time reversal.
pub struct SlowFast<T: Scalar> {
    coeff: Vec<T>,
    eta: T,
    dir: T,
    u: Vec<T>,
    nodes: Vec<Vec<T>>,
}

impl<T: Scalar> SlowFast<T> {
    pub fn new(sys: &FlowSystem<T>, dir: i8) -> Self {
        let coeff = sys.q.coeff_table::<T>();
        let kappa = coeff.len() - 1;
        SlowFast {
            coeff,
            eta: sys.eta,
            dir: if dir >= 0 { T::one() } else { -T::one() },
            u: Vec::new(),
            nodes: vec![Vec::new(); kappa],
        }
    }
}

impl<T: Scalar> TaylorOde<T> for SlowFast<T> {
    type Elem = T;
    fn dim(&self) -> usize {
        3
    }
    fn begin_step(&mut self, order: usize) {
        self.u.clear();
        self.u.reserve(order + 1);
        for n in &mut self.nodes {
            n.clear();
            n.reserve(order + 1);
        }
    }
    fn rhs_coeff(&mut self, x: &[Vec<T>], k: usize, out: &mut [T]) {
        let kappa = self.nodes.len();
        self.u.push(x[0][k] - self.eta * x[2][k]);
        for i in 0..kappa {
            let mut v = if i == 0 {
                self.coeff[kappa] * self.u[k]
            } else {
                let (done, _) = self.nodes.split_at(i);
                jet::mul_coeff(&done[i - 1], &self.u, k)
            };
            if k == 0 {
                v += self.coeff[kappa - 1 - i];
            }
            self.nodes[i].push(v);
        }
        let qu = self.nodes[kappa - 1][k];
        out[0] = self.dir * self.eta * qu;
        out[1] = self.dir * x[2][k];
        out[2] = self.dir * (qu - x[1][k]);
    }
}

/// Third-order form as a Taylor system (cross-check target).
pub struct ThirdOrder<T: Scalar> {
    coeff: Vec<T>,
    eta: T,
    eta_inv: T,
    nodes: Vec<Vec<T>>,
}

impl<T: Scalar> ThirdOrder<T> {
    pub fn new(sys: &FlowSystem<T>) -> Self {
        let coeff = sys.q.coeff_table::<T>();
        let kappa = coeff.len() - 1;
        ThirdOrder {
            coeff,
            eta: sys.eta,
            eta_inv: sys.eta.recip(),
            nodes: vec![Vec::new(); kappa],
        }
    }
}

impl<T: Scalar> TaylorOde<T> for ThirdOrder<T> {
    type Elem = T;
    fn dim(&self) -> usize {
        3
    }
    fn begin_step(&mut self, order: usize) {
        for n in &mut self.nodes {
            n.clear();
            n.reserve(order + 1);
        }
    }
    fn rhs_coeff(&mut self, x: &[Vec<T>], k: usize, out: &mut [T]) {
        let kappa = self.nodes.len();
        for i in 0..kappa {
            let mut v = if i == 0 {
                self.coeff[kappa] * x[0][k]
            } else {
                let (done, _) = self.nodes.split_at(i);
                jet::mul_coeff(&done[i - 1], &x[0], k)
            };
            if k == 0 {
                v += self.coeff[kappa - 1 - i];
            }
            self.nodes[i].push(v);
        }
        let qf = self.nodes[kappa - 1][k];
        out[0] = self.eta * x[1][k];
        out[1] = self.eta * x[2][k];
        out[2] = (qf - x[1][k]) * self.eta_inv;
    }
}

/// Normal-form transformation:
/// `x~ = x2 + eps^(2(k-1)) Q'(x2) y2`,
/// `y~ = y2 - Q(x2) + (1/2) eps^(k-1) Q'(x2) z2`,
/// `z~ = z2 - eps^(k-1) Q'(x2) Q(x2)`.
pub fn nft_transform<T: Scalar>(state: [T; 3], q: &PolyQ, eps: T) -> [T; 3] {
    let eta = eps.powi(q.kappa() as i32 - 1);
    let [x, y, z] = state;
    let qx = q.eval_real(x, 0);
    let dq = q.eval_real(x, 1);
    [
        x + eta * eta * dq * y,
        y - qx + (eta * dq * z).mul_pow2(-1),
        z - eta * dq * qx,
    ]
}

/// Inverse of [`nft_transform`] by fixed-point iteration (the corrections
/// carry a factor `eps^(k-1)`, so the map is a strong contraction).
pub fn nft_invert<T: Scalar>(tilde: [T; 3], q: &PolyQ, eps: T) -> Result<[T; 3], SplitError> {
    let eta = eps.powi(q.kappa() as i32 - 1);
    let [xt, yt, zt] = tilde;
    let mut x = xt;
    let mut y = yt + q.eval_real(xt, 0);
    let mut z = zt;
    let tol = T::eps() * T::from_f64(4.0);
    for _ in 0..200 {
        let qx = q.eval_real(x, 0);
        let dq = q.eval_real(x, 1);
        let xn = xt - eta * eta * dq * y;
        let yn = yt + qx - (eta * dq * z).mul_pow2(-1);
        let zn = zt + eta * dq * qx;
        let delta = (xn - x).abs() + (yn - y).abs() + (zn - z).abs();
        x = xn;
        y = yn;
        z = zn;
        let scale = T::one() + x.abs() + y.abs() + z.abs();
        if delta <= tol * scale {
            return Ok([x, y, z]);
        }
    }
    Err(SplitError::NewtonFailure("nft inversion"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldKind {
    /// One-dimensional stable manifold (j odd, Q'(q^j) < 0).
    Stable,
    /// One-dimensional unstable manifold (j even, Q'(q^j) > 0).
    Unstable,
}

/// Saddle-focus data at `q^j(eps)`.
#[derive(Debug, Clone)]
pub struct EquilibriumInfo<T> {
    pub j: usize,
    pub point: [T; 3],
    /// Real eigenvalue, `eps^(k-1) Q'(q^j) + O(eps^(2(k-1)))`.
    pub lambda1: T,
    /// One of the complex pair, `i - (1/2) eps^(k-1) Q'(q^j) + ...`.
    pub lambda23: Cx<T>,
    /// Unit eigenvector of `lambda1`.
    pub v1: [T; 3],
    pub kind: ManifoldKind,
}

/// Newton-converges the equilibrium near `(q^j, 0, 0)` and solves the
/// characteristic cubic (which reduces to `lambda^3 + lambda = a` with
/// `a = eta Q'(q^j)` for this family) for the eigendata.
pub fn equilibrium<T: Scalar>(
    sys: &FlowSystem<T>,
    rs: &RootSet<T>,
    j: usize,
) -> Result<EquilibriumInfo<T>, SplitError> {
    if !rs.valid {
        return Err(SplitError::NeedValidRoots);
    }
    if j < 1 || j > rs.kappa() {
        return Err(SplitError::IndexRange { j, max: rs.kappa() });
    }
    let mut p = [rs.root(j), T::zero(), T::zero()];
    let mut converged = false;
    for _ in 0..30 {
        let f = sys.rhs(p);
        let resid = f[0].abs() + f[1].abs() + f[2].abs();
        let jac = sys.jacobian(p);
        let step = solve3(jac, f).ok_or(SplitError::NewtonFailure("singular jacobian"))?;
        p = [p[0] - step[0], p[1] - step[1], p[2] - step[2]];
        let scale = T::one() + p[0].abs();
        if resid <= T::eps() * scale * T::from_f64(16.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SplitError::NewtonFailure("equilibrium"));
    }

    let u = p[0] - sys.eta * p[2];
    let a = sys.eta * sys.q.eval_real(u, 1);
    // lambda^3 + lambda - a = 0: Newton from lambda = a for the real root.
    let mut l1 = a;
    for _ in 0..60 {
        let f = l1 * l1 * l1 + l1 - a;
        let d = T::from_f64(3.0) * l1 * l1 + T::one();
        let step = f / d;
        l1 -= step;
        if step.abs() <= T::eps() * (T::one() + l1.abs()).mul_pow2(2) {
            break;
        }
    }
    // Deflation: lambda^2 + l1 lambda + (1 + l1^2) = 0.
    let disc = l1 * l1 - (T::one() + l1 * l1).mul_pow2(2);
    let root = Cx::new(disc, T::zero()).sqrt();
    let lambda23 = (Cx::from_re(-l1) + root).scale(T::from_f64(0.5));

    // Eigenvector ((1 + (a + l1) l1)/Q'(u), 1, l1), normalized.
    let dq = sys.q.eval_real(u, 1);
    let vx = (T::one() + (a + l1) * l1) / dq;
    let norm = (vx * vx + T::one() + l1 * l1).sqrt();
    let v1 = [vx / norm, norm.recip(), l1 / norm];
    let kind = if dq < T::zero() {
        ManifoldKind::Stable
    } else {
        ManifoldKind::Unstable
    };
    Ok(EquilibriumInfo {
        j,
        point: p,
        lambda1: l1,
        lambda23,
        v1,
        kind,
    })
}

fn solve3<T: Scalar>(a: [[T; 3]; 3], b: [T; 3]) -> Option<[T; 3]> {
    let mut m = [
        [a[0][0], a[0][1], a[0][2], b[0]],
        [a[1][0], a[1][1], a[1][2], b[1]],
        [a[2][0], a[2][1], a[2][2], b[2]],
    ];
    for col in 0..3 {
        let mut piv = col;
        for r in col + 1..3 {
            if m[r][col].abs() > m[piv][col].abs() {
                piv = r;
            }
        }
        if m[piv][col].is_zero() {
            return None;
        }
        m.swap(col, piv);
        for r in 0..3 {
            if r == col {
                continue;
            }
            let f = m[r][col] / m[col][col];
            for c in col..4 {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// Residual of the invariance equation in tilde coordinates for a truncated
/// slow-manifold series, evaluated by the chain rule through the exact
/// normal-form conjugacy: the graph is invariant iff
/// `m'(x~) x~. = (y~., z~.)` along the flow.
pub fn invariance_residual<T: Scalar>(
    sms: &SlowManifoldSeries,
    q: &PolyQ,
    x_tilde: T,
    eps: T,
) -> Result<(T, T), SplitError> {
    let eta = eps.powi(q.kappa() as i32 - 1);
    let (yt, zt) = sms.eval(x_tilde, eps);
    let (dyt, dzt) = sms.eval_deriv(x_tilde, eps);
    let [x, y, z] = nft_invert([x_tilde, yt, zt], q, eps)?;

    let sys = FlowSystem::new(q, eps);
    let [xd, yd, zd] = sys.rhs([x, y, z]);

    let qx = q.eval_real(x, 0);
    let dq = q.eval_real(x, 1);
    let ddq = q.eval_real(x, 2);
    // Chain rule through the transformation.
    let xtd = xd * (T::one() + eta * eta * ddq * y) + eta * eta * dq * yd;
    let ytd = yd - dq * xd + (eta * (ddq * xd * z + dq * zd)).mul_pow2(-1);
    let ztd = zd - eta * (ddq * qx + dq * dq) * xd;

    Ok((dyt * xtd - ytd, dzt * xtd - ztd))
}
