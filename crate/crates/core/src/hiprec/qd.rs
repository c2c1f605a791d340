//! Quad-double arithmetic: unevaluated sum of four binary64 values.
//!
//! Products use the full partial-product expansion (error terms kept through
//! third order), sums merge the component lists; both finish with a
//! distill-and-branch renormalization, so results stay within a few ulps of
//! the 212-bit target.

use super::dd::Dd;
use super::eft::{renormalize, two_prod};
use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Renormalized 4-component expansion, components decreasing in magnitude.
#[derive(Debug, Clone, Copy, Default)]
pub struct Qd(pub(crate) [f64; 4]);

impl Qd {
    pub const ZERO: Qd = Qd([0.0; 4]);
    pub const ONE: Qd = Qd([1.0, 0.0, 0.0, 0.0]);

    #[inline]
    pub fn from_f64(v: f64) -> Qd {
        Qd([v, 0.0, 0.0, 0.0])
    }

    #[inline]
    pub fn from_dd(v: Dd) -> Qd {
        Qd([v.hi, v.lo, 0.0, 0.0])
    }

    pub fn from_parts(parts: [f64; 4]) -> Qd {
        let mut work = parts;
        let mut out = [0.0; 4];
        renormalize(&mut work, &mut out);
        Qd(out)
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.0[0] + self.0[1]
    }

    #[inline]
    pub fn to_dd(self) -> Dd {
        Dd::new(self.0[0], self.0[1])
    }

    #[inline]
    pub fn parts(self) -> [f64; 4] {
        self.0
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    #[inline]
    pub fn is_zero_val(self) -> bool {
        self.0[0] == 0.0
    }

    #[inline]
    pub fn abs(self) -> Qd {
        if self.0[0] < 0.0 || (self.0[0] == 0.0 && self.to_f64() < 0.0) {
            -self
        } else {
            self
        }
    }

    /// Exact scaling by a power of two (split beyond the normal exponent range).
    #[inline]
    pub fn mul_pow2(self, k: i32) -> Qd {
        if !(-1021..=1023).contains(&k) {
            let half = k / 2;
            return self.mul_pow2(half).mul_pow2(k - half);
        }
        let f = f64::from_bits(((1023 + k) as u64) << 52);
        Qd([self.0[0] * f, self.0[1] * f, self.0[2] * f, self.0[3] * f])
    }

    pub fn add_f64(self, b: f64) -> Qd {
        let mut work = [self.0[0], self.0[1], self.0[2], self.0[3], b];
        merge_by_magnitude(&mut work);
        let mut out = [0.0; 4];
        renormalize(&mut work, &mut out);
        Qd(out)
    }

    pub fn mul_f64(self, b: f64) -> Qd {
        let (p0, e0) = two_prod(self.0[0], b);
        let (p1, e1) = two_prod(self.0[1], b);
        let (p2, e2) = two_prod(self.0[2], b);
        let p3 = self.0[3] * b;
        let mut work = [p0, p1, e0, p2, e1, p3, e2];
        let mut out = [0.0; 4];
        renormalize(&mut work, &mut out);
        Qd(out)
    }

    pub fn recip(self) -> Qd {
        Qd::ONE / self
    }

    pub fn sqr(self) -> Qd {
        self * self
    }
}

/// Sorts a small slice by decreasing magnitude (insertion sort).
#[inline]
fn merge_by_magnitude(v: &mut [f64]) {
    for i in 1..v.len() {
        let x = v[i];
        let mut j = i;
        while j > 0 && v[j - 1].abs() < x.abs() {
            v[j] = v[j - 1];
            j -= 1;
        }
        v[j] = x;
    }
}

impl Neg for Qd {
    type Output = Qd;
    #[inline]
    fn neg(self) -> Qd {
        Qd([-self.0[0], -self.0[1], -self.0[2], -self.0[3]])
    }
}

impl Add for Qd {
    type Output = Qd;
    fn add(self, rhs: Qd) -> Qd {
        // Merge the two component lists in decreasing magnitude, distill.
        let a = &self.0;
        let b = &rhs.0;
        let mut work = [0.0f64; 8];
        let (mut i, mut j, mut k) = (0, 0, 0);
        while i < 4 && j < 4 {
            if a[i].abs() >= b[j].abs() {
                work[k] = a[i];
                i += 1;
            } else {
                work[k] = b[j];
                j += 1;
            }
            k += 1;
        }
        while i < 4 {
            work[k] = a[i];
            i += 1;
            k += 1;
        }
        while j < 4 {
            work[k] = b[j];
            j += 1;
            k += 1;
        }
        let mut out = [0.0; 4];
        renormalize(&mut work, &mut out);
        Qd(out)
    }
}

impl Sub for Qd {
    type Output = Qd;
    #[inline]
    fn sub(self, rhs: Qd) -> Qd {
        self + (-rhs)
    }
}

impl Mul for Qd {
    type Output = Qd;
    fn mul(self, rhs: Qd) -> Qd {
        let a = &self.0;
        let b = &rhs.0;
        // Partial products by order:  order 0 exact, orders 1-2 with error
        // terms, order 3 plain (its error is below the target precision).
        let (p00, q00) = two_prod(a[0], b[0]);
        let (p01, q01) = two_prod(a[0], b[1]);
        let (p10, q10) = two_prod(a[1], b[0]);
        let (p02, q02) = two_prod(a[0], b[2]);
        let (p11, q11) = two_prod(a[1], b[1]);
        let (p20, q20) = two_prod(a[2], b[0]);
        let p03 = a[0] * b[3];
        let p12 = a[1] * b[2];
        let p21 = a[2] * b[1];
        let p30 = a[3] * b[0];
        let mut work = [
            p00, // order 0
            p01, p10, q00, // order 1
            p02, p11, p20, q01, q10, // order 2
            p03, p12, p21, p30, q02, q11, q20, // order 3
        ];
        let mut out = [0.0; 4];
        renormalize(&mut work, &mut out);
        Qd(out)
    }
}

impl Div for Qd {
    type Output = Qd;
    fn div(self, rhs: Qd) -> Qd {
        let b0 = rhs.0[0];
        let q0 = self.0[0] / b0;
        if !q0.is_finite() {
            return Qd([q0, q0, q0, q0]);
        }
        let mut r = self - rhs.mul_f64(q0);
        let q1 = r.0[0] / b0;
        r -= rhs.mul_f64(q1);
        let q2 = r.0[0] / b0;
        r -= rhs.mul_f64(q2);
        let q3 = r.0[0] / b0;
        r -= rhs.mul_f64(q3);
        let q4 = r.0[0] / b0;
        let mut work = [q0, q1, q2, q3, q4];
        let mut out = [0.0; 4];
        renormalize(&mut work, &mut out);
        Qd(out)
    }
}

impl AddAssign for Qd {
    fn add_assign(&mut self, rhs: Qd) {
        *self = *self + rhs;
    }
}
impl SubAssign for Qd {
    fn sub_assign(&mut self, rhs: Qd) {
        *self = *self - rhs;
    }
}
impl MulAssign for Qd {
    fn mul_assign(&mut self, rhs: Qd) {
        *self = *self * rhs;
    }
}
impl DivAssign for Qd {
    fn div_assign(&mut self, rhs: Qd) {
        *self = *self / rhs;
    }
}

// Equal values can carry different component layouts (the representation is
// not unique at ulp/2 boundaries), so compare through the exact difference.
impl PartialEq for Qd {
    fn eq(&self, other: &Qd) -> bool {
        (*self - *other).0 == [0.0; 4]
    }
}

impl PartialOrd for Qd {
    fn partial_cmp(&self, other: &Qd) -> Option<Ordering> {
        if !self.is_finite() || !other.is_finite() {
            return self.to_f64().partial_cmp(&other.to_f64());
        }
        let d = *self - *other;
        for c in d.0 {
            if c != 0.0 {
                return c.partial_cmp(&0.0);
            }
        }
        Some(Ordering::Equal)
    }
}

impl std::fmt::Display for Qd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&super::convert::to_decimal_components(&self.0, 66))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fma_is_fused() {
        // If mul_add were not fused this would evaluate to 0.
        let a = 2f64.powi(27) + 1.0;
        let r = f64::mul_add(a, a, -(a * a));
        assert_eq!(r, 1.0);
    }

    #[test]
    fn exact_cancellation_2_pow_80() {
        let one = Qd::ONE;
        let tiny = Qd::from_f64(2f64.powi(-80));
        let r = (one + tiny) - one;
        assert_eq!(r.0[0], 2f64.powi(-80));
        assert_eq!(r.0[1], 0.0);
    }

    #[test]
    fn third_roundtrip() {
        let third = Qd::ONE / Qd::from_f64(3.0);
        let r = third.mul_f64(3.0) - Qd::ONE;
        assert!(r.abs().to_f64() < 1e-60, "residual {:e}", r.to_f64());
    }

    #[test]
    fn mul_against_dd() {
        let a = Qd::from_f64(1.7).recip();
        let b = Qd::from_f64(3.9).recip();
        let q = a * b;
        let d = a.to_dd() * b.to_dd();
        assert!((q.to_dd() - d).abs().to_f64() < 1e-29);
    }
}
