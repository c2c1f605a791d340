//! Double-double arithmetic: unevaluated sum of two binary64 values.

use super::eft::{quick_two_sum, renormalize, two_prod, two_sum};
use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Unevaluated, renormalized sum `hi + lo` with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dd {
    pub(crate) hi: f64,
    pub(crate) lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (s, e) = two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn from_f64(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn parts(self) -> [f64; 2] {
        [self.hi, self.lo]
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    pub fn is_zero_val(self) -> bool {
        self.hi == 0.0
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    /// Exact scaling by a power of two (split beyond the normal exponent range).
    #[inline]
    pub fn mul_pow2(self, k: i32) -> Dd {
        if !(-1021..=1023).contains(&k) {
            let half = k / 2;
            return self.mul_pow2(half).mul_pow2(k - half);
        }
        let f = pow2(k);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let e = f64::mul_add(self.lo, b, e);
        let (s, t) = quick_two_sum(p, e);
        Dd { hi: s, lo: t }
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Dd {
        let (s, e) = two_sum(self.hi, b);
        let e = e + self.lo;
        let (s, t) = quick_two_sum(s, e);
        Dd { hi: s, lo: t }
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn sqr(self) -> Dd {
        let (p, e) = two_prod(self.hi, self.hi);
        let e = f64::mul_add(2.0 * self.hi, self.lo, e);
        let (s, t) = quick_two_sum(p, e);
        Dd { hi: s, lo: t }
    }
}

#[inline]
fn pow2(k: i32) -> f64 {
    f64::from_bits(((1023 + k) as u64) << 52)
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        // Accurate (IEEE-style) double-double addition.
        let (s0, e0) = two_sum(self.hi, rhs.hi);
        let (s1, e1) = two_sum(self.lo, rhs.lo);
        let e0 = e0 + s1;
        let (s0, e0) = quick_two_sum(s0, e0);
        let e0 = e0 + e1;
        let (hi, lo) = quick_two_sum(s0, e0);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = f64::mul_add(self.hi, rhs.lo, e);
        let e = f64::mul_add(self.lo, rhs.hi, e);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q0 = self.hi / rhs.hi;
        if !q0.is_finite() {
            return Dd { hi: q0, lo: q0 };
        }
        let r = self - rhs.mul_f64(q0);
        let q1 = r.hi / rhs.hi;
        let r = r - rhs.mul_f64(q1);
        let q2 = r.hi / rhs.hi;
        let mut work = [q0, q1, q2];
        let mut out = [0.0; 2];
        renormalize(&mut work, &mut out);
        Dd {
            hi: out[0],
            lo: out[1],
        }
    }
}

impl AddAssign for Dd {
    fn add_assign(&mut self, rhs: Dd) {
        *self = *self + rhs;
    }
}
impl SubAssign for Dd {
    fn sub_assign(&mut self, rhs: Dd) {
        *self = *self - rhs;
    }
}
impl MulAssign for Dd {
    fn mul_assign(&mut self, rhs: Dd) {
        *self = *self * rhs;
    }
}
impl DivAssign for Dd {
    fn div_assign(&mut self, rhs: Dd) {
        *self = *self / rhs;
    }
}

// Equal values can carry different component layouts (the representation is
// not unique at ulp/2 boundaries), so compare through the exact difference.
impl PartialEq for Dd {
    fn eq(&self, other: &Dd) -> bool {
        let d = *self - *other;
        d.hi == 0.0 && d.lo == 0.0
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        if !self.is_finite() || !other.is_finite() {
            return self.to_f64().partial_cmp(&other.to_f64());
        }
        let d = *self - *other;
        if d.hi != 0.0 {
            d.hi.partial_cmp(&0.0)
        } else {
            d.lo.partial_cmp(&0.0)
        }
    }
}

impl std::fmt::Display for Dd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&super::convert::to_decimal_components(&self.parts(), 34))
    }
}
