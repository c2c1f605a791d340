//! Dense rational polynomials and truncated power series whose coefficients
//! are polynomials (series in `eta = eps^(kappa-1)` with polynomial-in-x
//! coefficients).  Degrees stay small (order <= 12), so everything is dense.

use crate::hiprec::Scalar;
use num_rational::BigRational;
use num_traits::Zero;

/// Dense polynomial, `c[i]` the coefficient of `x^i`.
pub type RatPoly = Vec<BigRational>;

/// Truncated series: `v[beta]` is the polynomial coefficient of `eta^beta`.
pub type PolySeries = Vec<RatPoly>;

pub fn p_trim(p: &mut RatPoly) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

pub fn p_zero() -> RatPoly {
    vec![BigRational::zero()]
}

pub fn p_is_zero(p: &RatPoly) -> bool {
    p.iter().all(Zero::is_zero)
}

pub fn p_add(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let mut out = vec![BigRational::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] += c;
    }
    p_trim(&mut out);
    out
}

pub fn p_sub(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let mut out = vec![BigRational::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] -= c;
    }
    p_trim(&mut out);
    out
}

pub fn p_mul(a: &RatPoly, b: &RatPoly) -> RatPoly {
    if p_is_zero(a) || p_is_zero(b) {
        return p_zero();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    p_trim(&mut out);
    out
}

pub fn p_scale(a: &RatPoly, s: &BigRational) -> RatPoly {
    let mut out: RatPoly = a.iter().map(|c| c * s).collect();
    p_trim(&mut out);
    out
}

pub fn p_diff(a: &RatPoly) -> RatPoly {
    if a.len() <= 1 {
        return p_zero();
    }
    let mut out = Vec::with_capacity(a.len() - 1);
    for (i, c) in a.iter().enumerate().skip(1) {
        out.push(c * BigRational::from_integer(i.into()));
    }
    p_trim(&mut out);
    out
}

pub fn p_degree(a: &RatPoly) -> usize {
    let mut d = 0;
    for (i, c) in a.iter().enumerate() {
        if !c.is_zero() {
            d = i;
        }
    }
    d
}

pub fn p_eval_rational(a: &RatPoly, x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in a.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

pub fn p_eval<T: Scalar>(a: &RatPoly, x: T) -> T {
    let mut acc = T::zero();
    for c in a.iter().rev() {
        acc = acc * x + T::from_rational(c);
    }
    acc
}

/// Series of polynomials, truncated to eta-order `trunc` (inclusive).
pub fn ps_new(trunc: usize) -> PolySeries {
    vec![p_zero(); trunc + 1]
}

pub fn ps_add(a: &PolySeries, b: &PolySeries) -> PolySeries {
    let len = a.len().max(b.len());
    let mut out = ps_new(len - 1);
    for (i, p) in a.iter().enumerate() {
        out[i] = p_add(&out[i], p);
    }
    for (i, p) in b.iter().enumerate() {
        out[i] = p_add(&out[i], p);
    }
    out
}

pub fn ps_sub(a: &PolySeries, b: &PolySeries) -> PolySeries {
    let len = a.len().max(b.len());
    let mut out = ps_new(len - 1);
    for (i, p) in a.iter().enumerate() {
        out[i] = p_add(&out[i], p);
    }
    for (i, p) in b.iter().enumerate() {
        out[i] = p_sub(&out[i], p);
    }
    out
}

pub fn ps_mul(a: &PolySeries, b: &PolySeries, trunc: usize) -> PolySeries {
    let mut out = ps_new(trunc);
    for (i, ai) in a.iter().enumerate().take(trunc + 1) {
        if p_is_zero(ai) {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(trunc + 1 - i) {
            if !p_is_zero(bj) {
                out[i + j] = p_add(&out[i + j], &p_mul(ai, bj));
            }
        }
    }
    out
}

/// Multiplies by eta^k (shift).
pub fn ps_shift(a: &PolySeries, k: usize, trunc: usize) -> PolySeries {
    let mut out = ps_new(trunc);
    for (i, p) in a.iter().enumerate() {
        if i + k <= trunc {
            out[i + k] = p.clone();
        }
    }
    out
}

/// Embeds a plain polynomial at eta^0.
pub fn ps_of_poly(p: &RatPoly, trunc: usize) -> PolySeries {
    let mut out = ps_new(trunc);
    out[0] = p.clone();
    out
}

/// x as a series (identity).
pub fn ps_x(trunc: usize) -> PolySeries {
    let mut out = ps_new(trunc);
    out[0] = vec![BigRational::zero(), BigRational::from_integer(1.into())];
    out
}

/// Composes a polynomial with a series `xi = x + delta` where `delta` has
/// eta-valuation >= 1: `P(xi) = sum_m P^(m)(x)/m! delta^m`.
pub fn p_compose_series(p: &RatPoly, xi: &PolySeries, trunc: usize) -> PolySeries {
    let delta = ps_sub(xi, &ps_x(trunc));
    // Valuation of delta bounds the number of Taylor terms needed.
    let val = delta
        .iter()
        .position(|c| !p_is_zero(c))
        .unwrap_or(trunc + 1);
    let mut out = ps_of_poly(p, trunc);
    if val > trunc {
        return out;
    }
    let mut deriv = p.clone();
    let mut delta_pow = ps_of_poly(&vec![BigRational::from_integer(1.into())], trunc);
    let mut factorial = BigRational::from_integer(1.into());
    let mmax = trunc / val;
    for m in 1..=mmax {
        deriv = p_diff(&deriv);
        if p_is_zero(&deriv) {
            break;
        }
        delta_pow = ps_mul(&delta_pow, &delta, trunc);
        factorial *= BigRational::from_integer(m.into());
        let coeff_poly = p_scale(&deriv, &factorial.recip());
        let term = ps_mul(&ps_of_poly(&coeff_poly, trunc), &delta_pow, trunc);
        out = ps_add(&out, &term);
    }
    out
}

/// Composes a polynomial-series with `xi` in its x-argument.
pub fn ps_compose_series(f: &PolySeries, xi: &PolySeries, trunc: usize) -> PolySeries {
    let mut out = ps_new(trunc);
    for (i, p) in f.iter().enumerate().take(trunc + 1) {
        if p_is_zero(p) {
            continue;
        }
        let comp = p_compose_series(p, xi, trunc);
        let shifted = ps_shift(&comp, i, trunc);
        out = ps_add(&out, &shifted);
    }
    out
}

/// Evaluates a series at numeric (x, eta).
pub fn ps_eval<T: Scalar>(f: &PolySeries, x: T, eta: T) -> T {
    let mut acc = T::zero();
    for p in f.iter().rev() {
        acc = acc * eta + p_eval(p, x);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn pr(v: &[i64]) -> RatPoly {
        v.iter()
            .map(|&n| BigRational::from_integer(n.into()))
            .collect()
    }

    #[test]
    fn poly_basics() {
        let a = pr(&[1, 2]); // 1 + 2x
        let b = pr(&[0, 0, 3]); // 3x^2
        assert_eq!(p_mul(&a, &b), pr(&[0, 0, 3, 6]));
        assert_eq!(p_diff(&b), pr(&[0, 6]));
        assert_eq!(p_degree(&p_add(&a, &b)), 2);
        let x = BigRational::new(1.into(), 2.into());
        assert_eq!(p_eval_rational(&a, &x), BigRational::from_integer(2.into()));
    }

    #[test]
    fn compose_with_shifted_identity() {
        // P(x) = x^2, xi = x + eta: P(xi) = x^2 + 2x eta + eta^2.
        let p = pr(&[0, 0, 1]);
        let mut xi = ps_x(3);
        xi[1] = pr(&[1]);
        let c = p_compose_series(&p, &xi, 3);
        assert_eq!(c[0], pr(&[0, 0, 1]));
        assert_eq!(c[1], pr(&[0, 2]));
        assert_eq!(c[2], pr(&[1]));
        assert!(p_is_zero(&c[3]));
    }

    #[test]
    fn series_inverse_composition() {
        // xi = x - eta^2 x^2; composing x + eta^2 xi^2-ish must cancel head terms.
        let trunc = 4;
        let mut f = ps_x(trunc); // F = x + eta^2 x^2
        f[2] = pr(&[0, 0, 1]);
        // Invert by iteration: xi = x - eta^2 xi^2
        let mut xi = ps_x(trunc);
        for _ in 0..3 {
            let sq = ps_mul(&xi, &xi, trunc);
            xi = ps_sub(&ps_x(trunc), &ps_shift(&sq, 2, trunc));
        }
        let ident = ps_compose_series(&f, &xi, trunc);
        assert_eq!(ident[0], pr(&[0, 1]));
        for beta in 1..=trunc {
            assert!(p_is_zero(&ident[beta]), "beta={beta}: {:?}", ident[beta]);
        }
        let one = BigRational::one();
        assert_eq!(p_eval_rational(&ident[0], &one), one);
    }
}
