//! Coefficients of the formal power-series solution of the inner system
//!
//! ```text
//! (k-1) s^2 y' = -(1 - s z)^(-k) z - k s y
//! (k-1) s^2 z' =  (1 - s z)^(-k) y + 1 - k s z
//! ```
//!
//! solved order by order; each order is a triangular linear step (the
//! unknown enters through the constant term of the binomial factor, which
//! is 1, so nothing ever divides by zero).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exact inner-series coefficients `(y_alpha, z_alpha)`, alpha = 0..=n.
#[derive(Debug, Clone)]
pub struct SeriesPair {
    pub kappa: usize,
    pub n: usize,
    pub y: Vec<BigRational>,
    pub z: Vec<BigRational>,
}

impl SeriesPair {
    /// Euclidean magnitude squared of `phi_alpha`, exact.
    pub fn phi_norm_sqr(&self, alpha: usize) -> BigRational {
        &self.y[alpha] * &self.y[alpha] + &self.z[alpha] * &self.z[alpha]
    }
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Computes the unique formal solution up to order `n`.
///
/// `B = (1 - u)^(-kappa)` with `u = s z` obeys `(1-u) B' = kappa u' B`,
/// which gives `B_(m+1)` from `u` (that is, `z`) up to index `m`:
/// the coefficients stay triangular in the unknowns.
pub fn phi_coefficients(kappa: usize, n: usize) -> SeriesPair {
    assert!(kappa >= 2, "kappa >= 2");
    let kq = int(kappa as i64);
    let km1 = int(kappa as i64 - 1);

    // y_0 = -1, z_0 = 0 from the s^0 terms.
    let mut y: Vec<BigRational> = vec![-BigRational::one()];
    let mut z: Vec<BigRational> = vec![BigRational::zero()];
    // u_m = z_(m-1); B_0 = 1.
    let mut b: Vec<BigRational> = vec![BigRational::one()];

    for order in 1..=n {
        // Extend B to index `order` using z up to order-1.
        // (m+1) B_(m+1) = sum_(i=1..m+1) u_i ((m-i+1) + kappa i) B_(m-i+1)
        let m = order - 1;
        let mut acc = BigRational::zero();
        for i in 1..=m + 1 {
            let u_i = &z[i - 1];
            if u_i.is_zero() {
                continue;
            }
            let w = int((m + 1 - i) as i64) + &kq * int(i as i64);
            acc += u_i * w * &b[m + 1 - i];
        }
        b.push(acc / int((m + 1) as i64));

        // Equation 2 at this order fixes y_order:
        // (k-1)(order-1) z_(order-1) = [B y]_order - k z_(order-1)
        // [B y]_order = y_order + sum_(m=1..order) B_m y_(order-m)
        let mut conv_by = BigRational::zero();
        for mm in 1..=order {
            conv_by += &b[mm] * &y[order - mm];
        }
        let y_next = (&km1 * int(order as i64 - 1) + &kq) * &z[order - 1] - conv_by;
        y.push(y_next);

        // Equation 1 fixes z_order:
        // (k-1)(order-1) c_(order-1) = -[B z]_order - k y_(order-1)
        // [B z]_order = z_order + sum_(m=1..order-1) B_m z_(order-m)
        let mut conv_bz = BigRational::zero();
        for mm in 1..order {
            conv_bz += &b[mm] * &z[order - mm];
        }
        let z_next = -(&km1 * int(order as i64 - 1) + &kq) * &y[order - 1] - conv_bz;
        z.push(z_next);
    }

    SeriesPair { kappa, n, y, z }
}

/// Independent residual oracle: substitutes the truncated series back into
/// the inner system, expanding the binomial factor by direct composition
/// (not the ODE recurrence used above), and returns the valuation of the
/// residual.  A formal solution to order n leaves valuation > n.
pub fn phi_residual_valuation(sp: &SeriesPair) -> usize {
    let n = sp.n;
    let guard = n + 2;
    let kappa = sp.kappa;

    let trunc = |v: &mut Vec<BigRational>| v.truncate(guard + 1);
    let mul = |a: &[BigRational], b: &[BigRational]| -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); guard + 1];
        for (i, ai) in a.iter().enumerate().take(guard + 1) {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate().take(guard + 1 - i) {
                if !bj.is_zero() {
                    out[i + j] += ai * bj;
                }
            }
        }
        out
    };

    let mut ys = sp.y.clone();
    let mut zs = sp.z.clone();
    ys.resize(guard + 1, BigRational::zero());
    zs.resize(guard + 1, BigRational::zero());
    trunc(&mut ys);
    trunc(&mut zs);

    // u = s z.
    let mut u = vec![BigRational::zero(); guard + 1];
    for i in 0..guard {
        u[i + 1] = zs[i].clone();
    }
    // B = (1-u)^(-kappa) = sum_m C(kappa+m-1, m) u^m by direct composition.
    let mut b = vec![BigRational::zero(); guard + 1];
    b[0] = BigRational::one();
    let mut upow = b.clone();
    let mut binom = BigRational::one();
    for m in 1..=guard {
        upow = mul(&upow, &u);
        binom = binom * int((kappa + m - 1) as i64) / int(m as i64);
        for i in 0..=guard {
            if !upow[i].is_zero() {
                b[i] += &binom * &upow[i];
            }
        }
    }

    // s^2 y' and s^2 z' have coefficient (i-1) * c_(i-1) at order i.
    let s2d = |v: &[BigRational]| -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); guard + 1];
        for i in 1..=guard {
            out[i] = int(i as i64 - 1) * &v[i - 1];
        }
        out
    };
    let km1 = int(kappa as i64 - 1);
    let kq = int(kappa as i64);

    // R1 = (k-1) s^2 y' + B z + k s y
    let mut r1 = s2d(&ys);
    for c in r1.iter_mut() {
        *c = &km1 * &*c;
    }
    let bz = mul(&b, &zs);
    for i in 0..=guard {
        r1[i] += &bz[i];
        if i >= 1 {
            r1[i] += &kq * &ys[i - 1];
        }
    }
    // R2 = (k-1) s^2 z' - B y - 1 + k s z
    let mut r2 = s2d(&zs);
    for c in r2.iter_mut() {
        *c = &km1 * &*c;
    }
    let by = mul(&b, &ys);
    for i in 0..=guard {
        r2[i] -= &by[i];
        if i >= 1 {
            r2[i] += &kq * &zs[i - 1];
        }
    }
    r2[0] -= BigRational::one();

    for i in 0..=guard {
        if !r1[i].is_zero() || !r2[i].is_zero() {
            return i;
        }
    }
    guard + 1
}
